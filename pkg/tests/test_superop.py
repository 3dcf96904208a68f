import math
from dataclasses import replace

import numpy as np
import pytest

from fluorspec.checks import random_params
from fluorspec.figures import symmetric_grid
from fluorspec.model import ModelParams, derive, steady_state
from fluorspec.spectrum import sigma_low_intensity, sigma_usual_grid
from fluorspec.superop import (ChannelSolver, NonUniqueSteadyStateError,
                               P_LOWER, P_UPPER, SIGMA_MINUS, Superoperator,
                               build_K_super, build_liouvillian_2lvl,
                               build_liouvillian_2lvl_lindblad, cp_check,
                               detection_operators, dissipation_spectrum,
                               gram_realization, hermiticity_defect,
                               propagate, sandwich, semigroup, sigma_oracle,
                               sigma_oracle_grid, sigma_time_domain,
                               steady_state_super, superop_from_action, unvec,
                               vec)

XS = symmetric_grid(-15.0, 15.0, 1001)


def _pure_decay():
    return superop_from_action(
        2, lambda r: SIGMA_MINUS @ r @ SIGMA_MINUS.conj().T
        - 0.5 * (P_UPPER @ r + r @ P_UPPER))


def test_vec_convention(rng):
    rho = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.allclose(unvec(sandwich(a, b) @ vec(rho), 3), a @ rho @ b,
                       atol=1e-12)
    assert vec(np.array([[1, 3], [2, 4]]))[1] == 2  # column stacking


def test_liouvillian_pure_decay_limit():
    p = ModelParams(gamma=0.6, omega2=0.0, z=0.0, y=0.0)
    liouv = build_liouvillian_2lvl(p)
    excited = np.diag([1.0, 0.0]).astype(complex)
    rate = liouv.apply(excited)
    assert rate[0, 0] == pytest.approx(-1.0, abs=1e-15)
    assert rate[1, 1] == pytest.approx(1.0, abs=1e-15)


def test_liouvillian_trace_preserving(rng):
    for _ in range(50):
        p = random_params(rng)
        assert build_liouvillian_2lvl(p).trace_defect() <= 1e-12
        assert build_K_super(p).trace_defect() <= 1e-12


def test_liouvillian_fixed_point(modified, rng):
    draws = [replace(modified, y=y) for y in (0.0, 0.5, 1.0, 4.0)]
    draws += [random_params(rng) for _ in range(100)]
    for p in draws:
        ss = steady_state(derive(p), p)
        liouv = build_liouvillian_2lvl(p)
        assert np.max(np.abs(liouv.apply(ss.rho_inf))) <= 1e-11


def test_two_constructions_agree(rng, modified):
    draws = [replace(modified, y=y, laser_phase=lp)
             for y in (0.0, 1.0) for lp in (0.0, 0.7)]
    draws += [random_params(rng) for _ in range(100)]
    for p in draws:
        gap = np.max(np.abs(build_liouvillian_2lvl(p).matrix
                            - build_liouvillian_2lvl_lindblad(p).matrix))
        assert gap <= 1e-12


def test_bandwidth_generator_reduces_at_zero(modified):
    assert np.array_equal(build_K_super(modified).matrix,
                          build_liouvillian_2lvl(modified).matrix)


def test_steady_state_super_ground_without_drive():
    p = ModelParams(gamma=0.6, omega2=0.0, z=0.3, y=0.2)
    rho = steady_state_super(build_liouvillian_2lvl(p))
    assert np.max(np.abs(rho - np.diag([0.0, 1.0]))) <= 1e-12


def test_steady_state_super_matches_closed_form(modified):
    p = replace(modified, y=0.5)
    rho = steady_state_super(build_liouvillian_2lvl(p))
    ss = steady_state(derive(p), p)
    assert np.max(np.abs(rho - ss.rho_inf)) <= 1e-10


def test_steady_state_super_resonant_population(usual):
    rho = steady_state_super(build_liouvillian_2lvl(usual))
    assert rho[0, 0].real == pytest.approx(28.0 / 57.0, abs=1e-12)


def test_steady_state_super_degenerate_raises():
    null = Superoperator(dim=2, matrix=np.zeros((4, 4), dtype=complex))
    with pytest.raises(NonUniqueSteadyStateError):
        steady_state_super(null)


def test_gram_realization(rng, modified):
    gp, gm = gram_realization(modified)
    assert np.vdot(gp, gp).real == pytest.approx(modified.g_plus_norm2,
                                                 rel=1e-14)
    assert np.vdot(gm, gm).real == pytest.approx(modified.g_minus_norm2,
                                                 rel=1e-14)
    assert complex(np.vdot(gp, gm)) == pytest.approx(modified.g_inner,
                                                     abs=1e-16)
    gp0, gm0 = gram_realization(ModelParams(gamma=0.6, omega2=1.0, z=0.0,
                                            y=0.0, g_minus_norm2=0.004))
    assert np.all(gp0 == 0.0) and np.vdot(gm0, gm0).real == pytest.approx(
        0.004, rel=1e-15)


def test_oracle_matches_usual_formula(usual):
    for y in (0.0, 0.5, 4.0):
        p = replace(usual, y=y)
        closed = sigma_usual_grid(p, XS)
        oracle = sigma_oracle_grid(p, XS)
        assert np.max(np.abs(closed - oracle)) <= 1e-10 * np.max(closed)


def test_oracle_low_intensity_limit(modified):
    p = replace(modified, omega2=1e-6, y=0.7, z=1.3)
    for x in (-2.0, 0.0, 1.3, 4.0):
        limit = sigma_low_intensity(p, x)
        assert abs(sigma_oracle(p, x) - limit) <= 1e-3 * abs(limit)


def test_oracle_phase_gauge_invariance(modified):
    p = replace(modified, y=1.0)
    ref = sigma_oracle(p, 2.0)
    for phase in (1.0, 2.5):
        assert abs(sigma_oracle(replace(p, laser_phase=phase), 2.0)
                   - ref) <= 1e-12


def test_oracle_grid_matches_scalar(modified):
    p = replace(modified, y=1.0)
    grid = sigma_oracle_grid(p, XS[::200])
    for x, val in zip(XS[::200], grid):
        assert sigma_oracle(p, float(x)) == pytest.approx(val, abs=1e-13)


def test_oracle_unitary_redraw_invariance(modified, rng):
    # Any unitary mixing of the two abstract scattering axes must leave
    # the summed channel spectrum unchanged.
    p = replace(modified, y=1.0)
    x = 1.7
    ops = detection_operators(p)
    solver = ChannelSolver(p, x)
    reference = sum(solver.spectrum(op) for op in ops)
    phases = rng.uniform(0.0, 2.0 * math.pi, 2)
    theta = rng.uniform(0.0, math.pi)
    u = np.array([[math.cos(theta), math.sin(theta)],
                  [-math.sin(theta), math.cos(theta)]]) @ np.diag(
                      np.exp(1j * phases))
    gp, gm = gram_realization(p)
    gp_r, gm_r = u.conj() @ gp, u.conj() @ gm
    redrawn = [ops[0]] + [np.diag([gp_r[a], gm_r[a]]) for a in range(2)]
    mixed = sum(solver.spectrum(op) for op in redrawn)
    assert abs(mixed - reference) <= 1e-12
    assert abs(reference - sigma_oracle(p, x)) <= 1e-12


def test_time_domain_identity(modified):
    p = replace(modified, y=1.0)
    memo = {}
    for x in (-4.0, 0.0, 3.3):
        resolvent = sigma_oracle(p, x)
        quad = sigma_time_domain(p, x, tol=1e-12, memo=memo)
        assert abs(resolvent - quad) <= 1e-6 * abs(resolvent)


def test_cp_liouvillian_is_lindblad(rng, modified):
    for p in [modified] + [random_params(rng) for _ in range(30)]:
        assert cp_check(build_liouvillian_2lvl(p)) >= -1e-10


def test_cp_bandwidth_generator_fails(modified):
    gen = build_K_super(replace(modified, y=4.0))
    assert cp_check(gen) < -1e-6
    assert hermiticity_defect(gen) == pytest.approx(4.0, rel=1e-12)


def test_cp_pure_decay_pattern():
    spectrum = dissipation_spectrum(_pure_decay())
    assert np.allclose(sorted(spectrum), [0.0, 0.0, 0.0, 1.0], atol=1e-12)
    assert cp_check(_pure_decay()) >= -1e-12


def test_propagate_identity_and_decay():
    decay = _pure_decay()
    rho0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    assert np.array_equal(propagate(decay, rho0, 0.0), rho0)
    for t in (0.5, 2.0):
        rho_t = propagate(decay, rho0, t)
        assert rho_t[0, 0].real == pytest.approx(math.exp(-t), abs=1e-12)
        assert abs(np.trace(rho_t) - 1.0) <= 1e-12


def test_propagate_long_horizon_reaches_steady_state(modified):
    p = replace(modified, y=0.5)
    liouv = build_liouvillian_2lvl(p)
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    settled = propagate(liouv, rho0, 200.0)
    assert np.max(np.abs(settled - steady_state_super(liouv))) <= 1e-10


def test_semigroup_matches_direct_exponential(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    a -= 2.0 * np.eye(4)
    from fluorspec.linalg import mat_exp
    direct = mat_exp(a, 5.0)
    composed = semigroup(a, 5.0)
    assert np.max(np.abs(direct - composed)) <= 1e-10
    with pytest.raises(OverflowError):
        semigroup(500.0 * np.eye(2), 10.0)


def test_detection_operators_need_drive():
    with pytest.raises(ValueError, match="omega2 > 0"):
        detection_operators(ModelParams(gamma=0.6, omega2=0.0, z=0.0, y=0.0))
