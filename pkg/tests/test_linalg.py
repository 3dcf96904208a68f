import math

import numpy as np
import pytest

from fluorspec.linalg import (MaxSubdivisionsError, NoConvergenceError,
                              SingularMatrixError, eigvals,
                              integrate_adaptive, mat_exp, solve_linear,
                              solve_stacked)
from fluorspec.model import derive, build_K
from fluorspec.figures import figure_cases


def test_solve_identity():
    b = np.array([1.0, 2.0j, -1.0])
    assert np.array_equal(solve_linear(np.eye(3), b), b)


def test_solve_diagonal():
    a = np.array([[2.0, 0.0], [0.0, 1.0j]])
    x = solve_linear(a, np.array([2.0, 1.0j]))
    assert np.allclose(x, [1.0, 1.0], atol=0)


def test_solve_residual_random(rng):
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a += n * np.eye(n)
        b = rng.normal(size=n) + 1j * rng.normal(size=n)
        x = solve_linear(a, b)
        resid = np.linalg.norm(a @ x - b)
        worst = max(worst, resid / (np.linalg.norm(a) * np.linalg.norm(x)
                                    + np.linalg.norm(b)))
    assert worst <= 1e-12


def test_solve_stacked_matches_scalar(rng):
    a = rng.normal(size=(40, 3, 3)) + 1j * rng.normal(size=(40, 3, 3))
    a += 3 * np.eye(3)
    b = rng.normal(size=(40, 3)) + 1j * rng.normal(size=(40, 3))
    batched = solve_stacked(a, b)
    for k in range(40):
        assert np.max(np.abs(batched[k] - solve_linear(a[k], b[k]))) < 1e-13


def test_solve_singular_raises():
    a = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(SingularMatrixError):
        solve_linear(a, np.array([1.0, 2.0]))


def test_solve_rejects_nonfinite():
    with pytest.raises(ValueError):
        solve_linear(np.array([[np.nan, 0.0], [0.0, 1.0]]), np.ones(2))


def test_mat_exp_zero_time(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.array_equal(mat_exp(a, 0.0), np.eye(4))


def test_mat_exp_diagonal():
    e = mat_exp(np.diag([-1.0, -2.0]), 1.0)
    assert np.allclose(np.diag(e), [math.exp(-1.0), math.exp(-2.0)],
                       rtol=1e-13)


def test_mat_exp_nilpotent():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert np.allclose(mat_exp(a, 1.0), np.eye(2) + a, atol=1e-15)


def test_mat_exp_semigroup(rng):
    for _ in range(50):
        n = int(rng.integers(2, 6))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a = a / (np.linalg.norm(a, 2) + 1.0) - 0.5 * np.eye(n)
        s, t = rng.uniform(0.1, 3.0, 2)
        gap = np.max(np.abs(mat_exp(a, s) @ mat_exp(a, t) - mat_exp(a, s + t)))
        assert gap <= 1e-10


def test_mat_exp_overflow_guard():
    with pytest.raises(OverflowError):
        mat_exp(10.0 * np.eye(2), 100.0)
    with pytest.raises(ValueError):
        mat_exp(np.eye(2), -1.0)


def test_eigvals_sorted():
    # Ascending lexicographic order on (real part, imaginary part).
    assert np.array_equal(eigvals(np.diag([1.0, 2.0j])), [2.0j, 1.0])
    w = eigvals(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert np.allclose(w, [-1.0j, 1.0j], atol=1e-14)


def test_eigvals_similarity_invariant(rng):
    for _ in range(50):
        n = int(rng.integers(2, 7))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        perm = np.eye(n)[rng.permutation(n)]
        assert np.max(np.abs(eigvals(a) - eigvals(perm @ a @ perm.T))) <= 1e-8


def test_eigvals_of_resonant_spectrum_matrix():
    # Root oracle: the same multiset from the characteristic polynomial
    # (pairing by sort order is unstable for near-equal real parts, so
    # match each eigenvalue to its closest root), plus the determinant
    # residual bound and stability at zero detuning.
    for case in figure_cases(1):
        p = case.params
        k = build_K(derive(p), p)
        own = eigvals(k)
        c2 = -np.trace(k)
        c1 = 0.5 * (np.trace(k) ** 2 - np.trace(k @ k))
        c0 = -np.linalg.det(k)
        roots = np.roots([1.0, c2, c1, c0])
        scale = np.linalg.norm(k, np.inf)
        for lam in own:
            assert np.min(np.abs(roots - lam)) < 1e-8 * scale
            assert abs(np.linalg.det(k - lam * np.eye(3))) <= 1e-8 * scale ** 3
        assert np.min(own.real) > -1e-12  # stable at zero detuning


def test_integrate_constant():
    assert integrate_adaptive(lambda x: 1.0, 0.0, 1.0, 1e-12) == pytest.approx(1.0, abs=1e-12)


def test_integrate_lorentzian():
    val = integrate_adaptive(lambda x: 1.0 / (1.0 + x * x), -100.0, 100.0,
                             1e-10)
    assert val == pytest.approx(2.0 * math.atan(100.0), abs=1e-9)


def test_integrate_subdivision_cap():
    with pytest.raises(MaxSubdivisionsError):
        integrate_adaptive(lambda x: math.sin(1.0 / (x + 1e-12)), 0.0, 1.0,
                           1e-14, max_depth=4)


def test_integrate_rejects_bad_interval():
    with pytest.raises(ValueError):
        integrate_adaptive(lambda x: x, 1.0, 0.0, 1e-6)
    with pytest.raises(ValueError):
        integrate_adaptive(lambda x: x, 0.0, 1.0, 0.0)
