"""Cross-module validation suite backing the ``validate`` CLI command.

Every check pairs an implementation path with an independent route to the
same number (closed form vs superoperator resolvent, analytic strength vs
adaptive quadrature, Monte Carlo mean vs matrix exponential, ...) and
reports the worst observed deviation against its limit.  The suite is the
package's tamper alarm: ``mutate`` deliberately scales one spectral
coefficient by 1 + 1e-6, which must trip the equivalence checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import angular, figures, multilevel, sme, spectrum, superop
from .linalg import eigvals, integrate_adaptive, mat_exp, solve_linear
from .model import (ModelParams, derive, steady_state,
                    steady_state_from_solve, validate)
from .output import format_sig12

__all__ = ["CheckResult", "run_suite", "random_params"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float
    detail: str = ""
    extras: tuple = ()  # (key, value) pairs for the machine report

    def line(self) -> str:
        status = "ok  " if self.passed else "FAIL"
        extra = f"  [{self.detail}]" if self.detail else ""
        return (f"{status} {self.name:<38} {self.value: .3e} "
                f"(limit {self.limit: .1e}){extra}")


def random_params(rng: np.random.Generator,
                  corrections: bool = True) -> ModelParams:
    """A validator-clean random parameter draw over moderate ranges."""
    gp2 = rng.uniform(0.0, 0.02) if corrections else 0.0
    gm2 = rng.uniform(0.0, 0.02) if corrections else 0.0
    inner = 0j
    if corrections and gp2 > 0 and gm2 > 0:
        mag = rng.uniform(0.0, 0.9) * math.sqrt(gp2 * gm2)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        inner = mag * complex(math.cos(phase), math.sin(phase))
    return ModelParams(
        gamma=rng.uniform(0.05, 3.0), omega2=rng.uniform(0.0, 50.0),
        z=rng.uniform(-5.0, 5.0), y=rng.uniform(0.0, 5.0),
        delta_plus=rng.uniform(-0.5, 0.5) if corrections else 0.0,
        delta_minus=rng.uniform(-0.5, 0.5) if corrections else 0.0,
        g_plus_norm2=gp2, g_minus_norm2=gm2, g_inner=inner,
        epsilon=rng.uniform(-0.005, 0.005) if corrections else 0.0,
        laser_phase=rng.uniform(0.0, 2.0 * math.pi) if corrections else 0.0,
    )


def _figure_param_sets() -> list[tuple[str, ModelParams]]:
    out = []
    for fig in (1, 2, 3):
        for case in figures.figure_cases(fig):
            out.append((f"fig{fig} {case.model} {case.label}", case.params))
    return out


def _check(name, worst, limit, detail="", extras=()) -> CheckResult:
    return CheckResult(name=name, passed=bool(worst <= limit),
                       value=float(worst), limit=float(limit), detail=detail,
                       extras=tuple(extras))


def run_suite(fast: bool = False, mutate: str | None = None,
              progress=None) -> list[CheckResult]:
    """Run every cross-module invariant check; returns one result each."""
    results: list[CheckResult] = []

    def add(result: CheckResult) -> None:
        results.append(result)
        if progress is not None:
            progress(result.line())

    spectrum.set_mutation(mutate)
    try:
        _run_all(add, fast)
    finally:
        spectrum.set_mutation(None)
    return results


def _run_all(add, fast: bool) -> None:
    rng = np.random.default_rng(1789)
    n_small = 50 if fast else 1000
    n_params = 60 if fast else 200
    fig_sets = _figure_param_sets()
    xs = figures.symmetric_grid(-15.0, 15.0, 301 if fast else 1001)

    # --- numeric kernel -------------------------------------------------
    worst = 0.0
    for _ in range(n_small):
        n = int(rng.integers(2, 9))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a += n * np.eye(n)  # keep well conditioned
        b = rng.normal(size=n) + 1j * rng.normal(size=n)
        x = solve_linear(a, b)
        resid = np.linalg.norm(a @ x - b)
        bound = np.linalg.norm(a) * np.linalg.norm(x) + np.linalg.norm(b)
        worst = max(worst, resid / bound)
    add(_check("kernel.solve-residual", worst, 1e-12))

    worst = 0.0
    for _ in range(n_small // 5):
        n = int(rng.integers(2, 6))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a = a / (np.linalg.norm(a, 2) + 1.0) - 0.5 * np.eye(n)
        s, t = rng.uniform(0.1, 3.0, 2)
        gap = np.max(np.abs(mat_exp(a, s) @ mat_exp(a, t) - mat_exp(a, s + t)))
        worst = max(worst, gap)
    add(_check("kernel.expm-semigroup", worst, 1e-10))

    worst = 0.0
    for _ in range(n_small // 5):
        n = int(rng.integers(2, 7))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        perm = np.eye(n)[rng.permutation(n)]
        gap = np.max(np.abs(eigvals(a) - eigvals(perm @ a @ perm.T)))
        worst = max(worst, gap)
    add(_check("kernel.eig-similarity", worst, 1e-8))

    # --- stationary state ----------------------------------------------
    worst_solve = 0.0
    worst_psd = 0.0
    for name, p in fig_sets + [("random", random_params(rng))
                               for _ in range(n_params)]:
        dp = derive(p)
        ss = steady_state(dp, p)
        worst_solve = max(worst_solve, float(np.max(np.abs(
            ss.d_vec - steady_state_from_solve(dp, p)))))
        worst_psd = max(worst_psd,
                        -float(np.linalg.eigvalsh(ss.rho_inf)[0]))
    add(_check("steady.closed-vs-solve", worst_solve, 1e-12))
    add(_check("steady.positivity", worst_psd, 1e-12))

    worst_fix = 0.0
    worst_two = 0.0
    worst_trace = 0.0
    draws = [p for _, p in fig_sets]
    draws += [random_params(rng) for _ in range(n_params // 2)]
    for p in draws:
        liouv = superop.build_liouvillian_2lvl(p)
        gen = superop.build_K_super(p)
        ss = steady_state(derive(p), p)
        worst_fix = max(worst_fix,
                        float(np.max(np.abs(liouv.apply(ss.rho_inf)))))
        worst_two = max(worst_two, float(np.max(np.abs(
            liouv.matrix - superop.build_liouvillian_2lvl_lindblad(p).matrix))))
        worst_trace = max(worst_trace, liouv.trace_defect(),
                          gen.trace_defect())
    add(_check("liouvillian.fixed-point", worst_fix, 1e-11))
    add(_check("liouvillian.two-constructions", worst_two, 1e-12))
    add(_check("liouvillian.trace-preservation", worst_trace, 1e-12))

    worst_cp = 0.0
    for p in draws[:20]:
        worst_cp = max(worst_cp, -superop.cp_check(
            superop.build_liouvillian_2lvl(p)))
    add(_check("cp.liouvillian-lindblad", worst_cp, 1e-10))
    k_y4 = superop.build_K_super(replace(figures.MODIFIED_BASE, y=4.0))
    add(_check("cp.bandwidth-generator-fails",
               superop.cp_check(k_y4) + 1e-6, 0.0,
               detail="cp_check value must sit below -1e-6"))

    # --- spectra: oracle equivalence ------------------------------------
    worst_eq = 0.0
    per_set = []
    for name, p in fig_sets:
        closed = spectrum.sigma_total_grid(p, xs)
        oracle = superop.sigma_oracle_grid(p, xs)
        rel = float(np.max(np.abs(closed - oracle)) / np.max(np.abs(closed)))
        per_set.append((name.replace(" ", "-"), format_sig12(rel)))
        worst_eq = max(worst_eq, rel)
    add(_check("spectrum.oracle-equivalence", worst_eq, 1e-10,
               detail="per-set errors in the machine report",
               extras=per_set))

    worst = 0.0
    for _, p in fig_sets:
        if p.has_corrections():
            continue
        gap = np.max(np.abs(spectrum.sigma_usual_grid(p, xs)
                            - spectrum.sigma_total_grid(p, xs)))
        worst = max(worst, float(gap))
    add(_check("spectrum.usual-model-equivalence", worst, 1e-12))

    worst = 0.0
    for _ in range(20 if fast else 50):
        p = random_params(rng)
        mirrored = replace(p, z=-p.z, epsilon=-p.epsilon,
                           delta_plus=-p.delta_plus,
                           delta_minus=-p.delta_minus,
                           g_inner=p.g_inner.conjugate())
        x = float(rng.uniform(-10.0, 10.0))
        worst = max(worst, abs(spectrum.sigma_total(p, x)
                               - spectrum.sigma_total(mirrored, -x)))
    add(_check("spectrum.reflection-symmetry", worst, 1e-12))

    worst = 0.0
    base = replace(figures.MODIFIED_BASE, y=1.0)
    ref = superop.sigma_oracle(base, 2.0)
    for phase in (1.0, 2.5):
        worst = max(worst, abs(
            superop.sigma_oracle(replace(base, laser_phase=phase), 2.0) - ref))
    add(_check("spectrum.phase-independence", worst, 1e-12))

    worst_pos = 0.0
    for _ in range(n_params):
        p = random_params(rng)
        worst_pos = max(worst_pos,
                        -float(np.min(spectrum.sigma_total_grid(
                            p, xs[:: 10 if fast else 5]))))
    add(_check("spectrum.positivity", worst_pos, 1e-12))

    # --- strength and limits --------------------------------------------
    worst = 0.0
    strength_sets = fig_sets[:8] if fast else fig_sets
    for name, p in strength_sets:
        closed = spectrum.strength(p)
        quad = integrate_adaptive(lambda x: spectrum.sigma_total(p, x),
                                  -500.0, 500.0, 1e-6)
        worst = max(worst, abs(quad - closed) / closed)
    add(_check("strength.quadrature", worst, 1e-2))
    add(_check("strength.usual-y0-exact",
               abs(spectrum.strength(figures.USUAL_BASE) - 28.0 / 57.0),
               1e-12))

    p_low = replace(figures.MODIFIED_BASE, omega2=1e-6, z=1.3, y=0.7)
    lo = np.array([spectrum.sigma_low_intensity(p_low, x) for x in xs])
    tot = spectrum.sigma_total_grid(p_low, xs)
    add(_check("limits.low-intensity",
               float(np.max(np.abs(lo - tot)) / np.max(tot)), 1e-3))

    p_bb = replace(figures.MODIFIED_BASE, y=1e4)
    xs_bb = np.linspace(-10.0, 10.0, 81)
    bb = np.array([spectrum.sigma_broadband(p_bb, x) for x in xs_bb])
    tot = spectrum.sigma_total_grid(p_bb, xs_bb)
    add(_check("limits.broadband",
               float(np.max(np.abs(bb - tot)) / np.max(tot)), 1e-2))
    add(_check("limits.broadband-usual-peak",
               abs(spectrum.sigma_broadband_scaled(
                   replace(figures.USUAL_BASE, y=1e4), 0.0)
                   - 1.0 / (1.0 + figures.GAMMA)), 1e-3))

    # --- time-domain identity --------------------------------------------
    worst = 0.0
    td_sets = [replace(figures.MODIFIED_BASE, y=1.0)]
    if not fast:
        td_sets.append(replace(figures.USUAL_BASE, z=2.5, y=0.5))
    for p in td_sets:
        memo: dict = {}
        for x in ((-4.0, 2.0) if fast else (-7.5, 0.0, 4.5)):
            res = superop.sigma_oracle(p, x)
            quad = superop.sigma_time_domain(p, x, tol=1e-12, memo=memo)
            worst = max(worst, abs(res - quad) / abs(res))
    add(_check("spectrum.time-domain-identity", worst, 1e-6))

    # --- angular ----------------------------------------------------------
    p_ang = replace(figures.MODIFIED_BASE, y=1.0)
    prof = angular.build_profiles(p_ang)
    worst = max(prof.constraint_residual(+1), prof.constraint_residual(-1))
    add(_check("angular.constraint", worst, 1e-10))
    worst = 0.0
    for x in (0.0, 3.7):
        worst = max(worst, abs(angular.integrate_solid_angle(p_ang, prof, x)
                               - spectrum.sigma_total(p_ang, x)))
    add(_check("angular.solid-angle-closure", worst, 1e-6))
    p_u = replace(figures.USUAL_BASE, y=1.0)
    prof0 = angular.build_profiles(p_u)
    worst = 0.0
    for theta in (0.9, math.pi / 2, 2.4):
        tot = spectrum.sigma_total(p_u, 1.3)
        for pol, sign in ((+1, 1.0), (-1, -1.0)):
            expected = (3.0 / (8.0 * math.pi)
                        * ((1.0 + sign * math.cos(theta)) / 2.0) ** 2 * tot)
            worst = max(worst, abs(
                angular.sigma_angular(p_u, prof0, 1.3, theta, pol) - expected))
    add(_check("angular.dipole-factorization", worst, 1e-12))

    # --- multilevel --------------------------------------------------------
    worst = 0.0
    for f_minus in (0.0, 0.5, 1.0, 2.0):
        levels = multilevel.AtomLevels(f_minus)
        ops = multilevel.build_decay_operators(levels)
        total = sum(ops.rect[m].conj().T @ ops.rect[m] for m in (-1, 0, 1))
        worst = max(worst, float(np.max(np.abs(
            total - np.eye(levels.dim_plus)))))
    add(_check("multilevel.decay-completeness", worst, 1e-12))

    levels = multilevel.AtomLevels(2.0)
    vac = multilevel.build_vacuum_liouvillian(levels)
    rho0 = np.zeros((levels.dim, levels.dim), dtype=complex)
    rho0[levels.dim - 1, levels.dim - 1] = 1.0
    worst = 0.0
    p_up, _ = multilevel._projectors(levels)
    for t in (0.5, 2.0, 5.0):
        rho_t = superop.propagate(vac, rho0, t)
        worst = max(worst, abs(np.trace(p_up @ rho_t).real - math.exp(-t)))
    add(_check("multilevel.vacuum-decay", worst, 1e-10))

    p_ml = replace(figures.MODIFIED_BASE, y=0.5)
    full = multilevel.build_driven_liouvillian(levels, p_ml)
    gap = np.max(np.abs(multilevel.extreme_block_superop(full, levels)
                        - superop.build_liouvillian_2lvl(p_ml).matrix))
    add(_check("multilevel.two-level-reduction", float(gap), 1e-12))

    report = multilevel.steady_state_full(levels, p_ml)
    ss = steady_state(derive(p_ml), p_ml)
    add(_check("multilevel.off-extreme-population",
               report.off_extreme_population, 1e-8))
    add(_check("multilevel.extreme-block",
               float(np.max(np.abs(report.extreme_block - ss.rho_inf))), 1e-8))

    # --- stochastic trajectories -------------------------------------------
    p_sme = replace(figures.MODIFIED_BASE, y=1.0)
    ground = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    cfg = sme.TrajectoryConfig(dt=1e-3, n_steps=1000 if fast else 2000,
                               seed=97531, n_traj=1000 if fast else 2000)
    ens = sme.ensemble_mean(p_sme, ground, cfg)
    liouv = superop.build_liouvillian_2lvl(p_sme)
    worst_z = 0.0
    memo: dict = {}
    for frac in (0.5, 1.0):
        idx = round(frac * cfg.n_steps)
        exact = superop.unvec(
            superop.semigroup(liouv.matrix, cfg.times[idx], memo)
            @ superop.vec(ground), 2)
        worst_z = max(
            worst_z,
            abs(ens.mean_pop[idx] - exact[0, 0].real) / ens.se_pop[idx],
            abs(ens.mean_coh[idx].real - exact[1, 0].real) / ens.se_coh_re[idx],
            abs(ens.mean_coh[idx].imag - exact[1, 0].imag) / ens.se_coh_im[idx])
    add(_check("sme.mean-consistency-z", worst_z, 4.0,
               detail="z-score vs matrix-exponential propagator"))

    # --- parameter validation sanity ----------------------------------------
    bad = ModelParams(gamma=0.6, omega2=1.0, z=0.0, y=0.0,
                      g_plus_norm2=1e-4, g_minus_norm2=1e-4, g_inner=1e-3)
    add(_check("validate.catches-gram-violation",
               0.0 if any(v.name == "cauchy-schwarz" for v in validate(bad))
               else 1.0, 0.5))
    bad = ModelParams(gamma=0.6, omega2=1.0, z=0.0, y=0.0, epsilon=-1e-3)
    add(_check("validate.catches-epsilon-violation",
               0.0 if any(v.name == "epsilon-with-zero-dg"
                          for v in validate(bad)) else 1.0, 0.5))
