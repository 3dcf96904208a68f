"""Small dense complex linear algebra and quadrature primitives.

Everything in this package works on matrices of dimension <= 64 (in
practice 3x3 resolvent systems and n^2 x n^2 superoperators with n <= 12),
so the kernels below optimize for determinism rather than throughput:
pivot selection and eigenvalue ordering are fixed rules, which makes
repeated runs bit-identical.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

# Largest superoperator in the package: the full f=2 -> f=3 sublevel
# space has Hilbert dimension 12, so its generators are 144 x 144.
MAX_DIM = 144

# Pivot moduli below PIVOT_RTOL * max|A| are treated as singular.
PIVOT_RTOL = 1e-14

# mat_exp rejects ||A t||_1 beyond this; e^700 is already near float max.
MAT_EXP_NORM_LIMIT = 700.0


class SingularMatrixError(ValueError):
    """A pivot fell below the singularity threshold.

    Signals an ill-posed input, e.g. a resolvent evaluated at a pole.
    """


class NoConvergenceError(RuntimeError):
    """The eigenvalue iteration hit its cap without converging."""


class MaxSubdivisionsError(RuntimeError):
    """Adaptive quadrature exhausted its subdivision budget."""


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {a.shape[0]} exceeds the supported {MAX_DIM}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("matrix entries must be finite")
    return a


def solve_linear(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by LU with partial pivoting.

    The pivot is the largest-modulus entry of the remaining column, ties
    broken by the lowest row index, so the elimination order (and hence
    the bits of the result) is reproducible.  ``b`` may be a vector or a
    matrix of stacked right-hand-side columns.

    Raises
    ------
    SingularMatrixError
        If a pivot modulus drops below ``PIVOT_RTOL * max|a|``.
    """
    a = _as_square(a)
    n = a.shape[0]
    b = np.asarray(b, dtype=complex)
    vector = b.ndim == 1
    rhs = b.reshape(n, -1) if vector else b
    if rhs.shape[0] != n:
        raise ValueError(f"rhs has {rhs.shape[0]} rows, matrix is {n}x{n}")

    threshold = PIVOT_RTOL * max(np.max(np.abs(a)), 0.0)
    aug = np.hstack([a.copy(), rhs.astype(complex)])
    for k in range(n):
        piv = k + int(np.argmax(np.abs(aug[k:, k])))  # argmax -> first max
        if abs(aug[piv, k]) < threshold or aug[piv, k] == 0:
            raise SingularMatrixError(
                f"pivot {abs(aug[piv, k]):.3e} below {threshold:.3e} at column {k}"
            )
        if piv != k:
            aug[[k, piv]] = aug[[piv, k]]
        factors = aug[k + 1:, k] / aug[k, k]
        aug[k + 1:, k:] -= factors[:, None] * aug[k, k:]

    x = np.empty_like(rhs)
    for k in range(n - 1, -1, -1):
        x[k] = (aug[k, n:] - aug[k, k + 1:n] @ x[k + 1:]) / aug[k, k]
    return x[:, 0] if vector else x


def solve_stacked(a, b) -> np.ndarray:
    """Batched form of :func:`solve_linear` for stacks of systems.

    ``a`` has shape (m, n, n) and ``b`` shape (m, n) or (m, n, k).  Uses
    LAPACK's partial-pivoting LU, which applies the same largest-modulus /
    lowest-index pivot rule; a unit test pins the two routes against each
    other.  Intended for frequency-grid evaluation where the systems are
    far from singular.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    try:
        if b.ndim == a.ndim - 1:  # stack of vector right-hand sides
            return np.linalg.solve(a, b[..., None])[..., 0]
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc


def mat_exp(a, t: float) -> np.ndarray:
    """Matrix exponential ``exp(a * t)`` for t >= 0.

    Scaling-and-squaring with Pade approximants (scipy); relative accuracy
    ~1e-12 for ``||a t||_1 <= 100``.

    Raises
    ------
    OverflowError
        If ``||a t||_1 > 700`` — an unstable generator or an excessive
        horizon.  Long stable horizons should be composed from shorter
        steps instead (see :func:`fluorspec.superop.semigroup`).
    """
    a = _as_square(a)
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    norm = np.linalg.norm(a, 1) * t
    if norm > MAT_EXP_NORM_LIMIT:
        raise OverflowError(
            f"||A t||_1 = {norm:.3e} exceeds {MAT_EXP_NORM_LIMIT:.0f}"
        )
    return scipy.linalg.expm(a * t)


def eigvals(a) -> np.ndarray:
    """All eigenvalues of ``a``, sorted by (real part, imaginary part).

    The sort key is quantized at 1e-12 * max|a| so that conjugate pairs
    (equal real parts up to rounding) order by imaginary part instead of
    by noise; the returned values themselves are untouched.
    """
    a = _as_square(a)
    try:
        w = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    quantum = 1e-12 * max(float(np.max(np.abs(a))), 1e-300)
    key_re = np.round(w.real / quantum)
    key_im = np.round(w.imag / quantum)
    return w[np.lexsort((key_im, key_re))]


def integrate_adaptive(f, a: float, b: float, tol: float,
                       max_depth: int = 48) -> float:
    """Adaptive Simpson quadrature of ``f`` on [a, b].

    Bisects intervals until the local Richardson error estimate meets the
    (absolute) tolerance; the tolerance is halved with each split so the
    total estimated error stays <= ``tol``.

    Raises
    ------
    MaxSubdivisionsError
        If an interval still fails its tolerance at ``max_depth`` — a sign
        of non-integrable behavior.
    """
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, tol, depth):
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = f(xl)
        fr = f(xr)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        err = left + right - whole
        if abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        if depth <= 0:
            raise MaxSubdivisionsError(
                f"interval [{x0}, {x2}] still above tolerance at max depth"
            )
        half = 0.5 * tol
        return (recurse(x0, xm, f0, fl, f1, left, half, depth - 1)
                + recurse(xm, x2, f1, fr, f2, right, half, depth - 1))

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, max_depth)
