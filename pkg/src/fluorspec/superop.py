"""Two-level Liouvillian and spectrum generator as 4x4 superoperators.

This module is the package's independent oracle: spectra are evaluated
here straight from the master-equation objects (a 4x4 resolvent solve per
detection channel), with no reference to the closed 3x3 resolvent form of
:mod:`fluorspec.spectrum`.  Agreement between the two routes is the main
acceptance gate.

Vectorization convention, fixed package-wide because basis mismatches are
the dominant bug class here: density matrices are stacked by columns,
``vec(rho)[i + n*j] = rho[i, j]``, so a sandwich ``A rho B`` has
superoperator ``kron(B.T, A)``.  Two-level basis: index 0 = upper
stretched state, index 1 = lower stretched state; for n = 2 the vec order
is (rho00, rho10, rho01, rho11).

The generator of the coherence-modified semigroup (bandwidth-dressed, not
positivity preserving) is built from the Liouvillian by moving the
off-diagonal blocks by -y P+ rho P- + y P- rho P+.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .linalg import eigvals, mat_exp, solve_linear, solve_stacked
from .model import ModelParams, require_valid

__all__ = [
    "Superoperator", "vec", "unvec", "sandwich", "superop_from_action",
    "build_liouvillian_2lvl", "build_liouvillian_2lvl_lindblad",
    "build_K_super", "steady_state_super", "propagate", "semigroup",
    "gram_realization", "detection_operators", "sigma_oracle",
    "sigma_oracle_grid", "sigma_time_domain", "ChannelSolver",
    "cp_check", "dissipation_spectrum", "hermitian_basis",
    "NonUniqueSteadyStateError",
]

SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
P_UPPER = np.diag([1.0, 0.0]).astype(complex)
P_LOWER = np.diag([0.0, 1.0]).astype(complex)


class NonUniqueSteadyStateError(RuntimeError):
    """The generator's null space is not one-dimensional."""


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho, dtype=complex).flatten(order="F")


def unvec(v: np.ndarray, n: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if n is None:
        n = round(math.isqrt(v.size))
    return v.reshape((n, n), order="F")


def sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator matrix of rho -> a @ rho @ b."""
    return np.kron(np.asarray(b).T, np.asarray(a))


@dataclass(eq=False)
class Superoperator:
    """A linear map on n x n operators, stored as its n^2 x n^2 matrix."""

    dim: int
    matrix: np.ndarray

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.dim)

    def trace_defect(self) -> float:
        """Max violation of trace preservation over the operator basis.

        Zero (to rounding) iff the trace functional is a left null vector.
        """
        n = self.dim
        row = self.matrix[np.arange(n) * (n + 1), :].sum(axis=0)
        return float(np.abs(row).max())


def superop_from_action(n: int, action) -> Superoperator:
    """Assemble the matrix of ``action`` by feeding the basis |i><j|."""
    m = np.zeros((n * n, n * n), dtype=complex)
    for j in range(n):
        for i in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            m[:, i + n * j] = vec(action(e))
    return Superoperator(dim=n, matrix=m)


# ----------------------------------------------------------------------
# Two-level Liouvillian, block construction.

def _block_coefficients(p: ModelParams) -> tuple[complex, complex, complex]:
    """(l_minus, l_plus, mu): lowering couplings and coherence damping.

    l_pm are the coefficients of the lowering operator in the two drive
    channels (phases carry the laser phase plus twice the level phase
    shifts); mu multiplies the lower-upper coherence and carries detuning,
    intensity shift, bandwidth and the direct-scattering widths.
    """
    omega = math.sqrt(p.omega2)
    s = p.delta_plus - p.delta_minus
    dgn2 = max(p.g_plus_norm2 + p.g_minus_norm2 - 2.0 * p.g_inner.real, 0.0)
    l_minus = -0.5 * omega * cmath.exp(-1j * (p.laser_phase + 2.0 * p.delta_minus))
    l_plus = -0.5 * omega * cmath.exp(-1j * (p.laser_phase + 2.0 * p.delta_plus))
    mu = (1j * (-p.z + p.omega2 * (p.epsilon - 0.25 * math.sin(2.0 * s)))
          - 0.5 * (1.0 + p.y + p.omega2 * (math.sin(s) ** 2 + dgn2)))
    return l_minus, l_plus, mu


def build_liouvillian_2lvl(p: ModelParams) -> Superoperator:
    """Two-level Liouvillian assembled block by block.

    Explicit 4x4 matrix in the (rho00, rho10, rho01, rho11) vec order;
    the upper-lower coherence row is the Hermitian image of the
    lower-upper one.
    """
    require_valid(p)
    lm, lp, mu = _block_coefficients(p)
    lmc, lpc, muc = lm.conjugate(), lp.conjugate(), mu.conjugate()
    m = np.array([
        [-1.0, -lmc, -lm, 0.0],   # upper population
        [lp,     mu,  0.0, -lm],  # lower-upper coherence
        [lpc,   0.0,  muc, -lmc],
        [1.0,   lmc,  lm,  0.0],  # lower population (feeding decay)
    ], dtype=complex)
    return Superoperator(dim=2, matrix=m)


def build_K_super(p: ModelParams) -> Superoperator:
    """Spectrum generator: the Liouvillian with bandwidth-moved coherences.

    Still trace preserving, but no longer positivity preserving once
    y > 0 (checked by :func:`cp_check` tests).
    """
    liouv = build_liouvillian_2lvl(p)
    m = liouv.matrix.copy()
    m += p.y * (sandwich(P_LOWER, P_UPPER) - sandwich(P_UPPER, P_LOWER))
    return Superoperator(dim=2, matrix=m)


# ----------------------------------------------------------------------
# Independent construction from jump operators (consistency oracle).

def gram_realization(p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Realize the two scattering amplitudes in an abstract C^2.

    Cholesky-style convention: g_+ along the first abstract axis, the
    orthogonal remainder of g_- real and nonnegative on the second.  Any
    unitary redraw of this realization leaves every trace formula
    unchanged (tested).
    """
    gp_norm = math.sqrt(max(p.g_plus_norm2, 0.0))
    if gp_norm > 0.0:
        gp = np.array([gp_norm, 0.0], dtype=complex)
        first = p.g_inner / gp_norm
        rest = p.g_minus_norm2 - abs(first) ** 2
        gm = np.array([first, math.sqrt(max(rest, 0.0))], dtype=complex)
    else:
        gp = np.zeros(2, dtype=complex)
        gm = np.array([math.sqrt(max(p.g_minus_norm2, 0.0)), 0.0],
                      dtype=complex)
    return gp, gm


def build_liouvillian_2lvl_lindblad(p: ModelParams) -> Superoperator:
    """Two-level Liouvillian built from jump operators and a Hamiltonian.

    Independent of the block construction: effective dipole operators for
    a three-mode photon space (driven dipole axis plus the two realized
    scattering axes), the drive Hamiltonian, the level light shifts and a
    pure-dephasing channel for the laser bandwidth.  The laser mode's
    component along the scattering axes is fixed so the induced intensity
    shift reproduces ``epsilon``.
    """
    require_valid(p)
    omega = math.sqrt(p.omega2)
    phase = cmath.exp(1j * p.laser_phase)
    gp, gm = gram_realization(p)
    dg = gp - gm
    dgn2 = float(np.vdot(dg, dg).real)
    if dgn2 > 1e-15 * (p.g_plus_norm2 + p.g_minus_norm2 + 1e-300):
        xi = 1j * (p.epsilon - p.g_inner.imag) * dg / dgn2
    else:
        xi = np.zeros(2, dtype=complex)

    beta = {}
    for eps, delta in (("+", p.delta_plus), ("-", p.delta_minus)):
        beta[eps] = -1j * cmath.exp(1j * delta) * math.sin(delta)

    jumps = [SIGMA_MINUS
             + omega * phase * (beta["+"] * P_UPPER + beta["-"] * P_LOWER)]
    for a in range(2):
        jumps.append(omega * phase * (gp[a] * P_UPPER + gm[a] * P_LOWER))
    if p.y > 0:
        sigma_z = P_UPPER - P_LOWER
        jumps.append(0.5 * math.sqrt(p.y) * sigma_z)

    drive = -0.5 * omega * (cmath.exp(-1j * (p.laser_phase
                                             + 2.0 * p.delta_minus))
                            + cmath.exp(-1j * p.laser_phase))
    shifts = {}
    for eps, delta, g in (("+", p.delta_plus, gp), ("-", p.delta_minus, gm)):
        shifts[eps] = -p.omega2 * (0.25 * math.sin(2.0 * delta)
                                   + complex(np.vdot(xi, g)).imag)
    ham = (-0.5 * p.z * (P_UPPER - P_LOWER)
           + 0.5j * (drive * SIGMA_MINUS
                     - drive.conjugate() * SIGMA_MINUS.conj().T)
           + shifts["+"] * P_UPPER + shifts["-"] * P_LOWER)

    eye = np.eye(2, dtype=complex)
    m = -1j * (sandwich(ham, eye) - sandwich(eye, ham))
    for v in jumps:
        vdv = v.conj().T @ v
        m += (sandwich(v, v.conj().T)
              - 0.5 * sandwich(vdv, eye) - 0.5 * sandwich(eye, vdv))
    return Superoperator(dim=2, matrix=m)


# ----------------------------------------------------------------------
# Stationary state, propagation.

def steady_state_super(liouv: Superoperator,
                       ratio_floor: float = 1e6) -> np.ndarray:
    """Unit-trace Hermitian null-space state of a trace-preserving map.

    Raises :class:`NonUniqueSteadyStateError` unless the two smallest
    singular values are separated by ``ratio_floor``.
    """
    _, svals, vh = np.linalg.svd(liouv.matrix)
    smallest = svals[-1]
    ratio = svals[-2] / max(smallest, np.finfo(float).tiny)
    if ratio < ratio_floor:
        raise NonUniqueSteadyStateError(
            f"singular-value ratio {ratio:.3e} below {ratio_floor:.1e}")
    rho = unvec(vh[-1].conj(), liouv.dim)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def semigroup(matrix: np.ndarray, t: float,
              memo: dict | None = None) -> np.ndarray:
    """exp(matrix * t) for stable generators at arbitrary horizons.

    Splits the horizon by repeated halving until each direct exponential
    sits inside :func:`fluorspec.linalg.mat_exp`'s accuracy domain
    (||A t||_1 <= 100), then composes with the semigroup property.  Pass a
    ``memo`` dict to share halved factors across calls (the quadrature
    oracles hit the same dyadic times repeatedly).
    """
    matrix = np.asarray(matrix, dtype=complex)
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if memo is None:
        memo = {}
    norm1 = np.linalg.norm(matrix, 1)

    def step(tau: float) -> np.ndarray:
        cached = memo.get(tau)
        if cached is not None:
            return cached
        if norm1 * tau <= 100.0 or tau == 0.0:
            out = mat_exp(matrix, tau)
        else:
            half = step(0.5 * tau)
            with np.errstate(over="ignore", invalid="ignore"):
                out = half @ half  # overflow surfaces as the raise below
        if not np.all(np.isfinite(out.view(float))):
            raise OverflowError(f"semigroup overflowed at horizon {tau}")
        memo[tau] = out
        return out

    return step(float(t))


def propagate(liouv: Superoperator, rho0: np.ndarray, t: float) -> np.ndarray:
    """Evolve rho0 by exp(liouv * t); trace is preserved to rounding."""
    e = semigroup(liouv.matrix, t)
    return unvec(e @ vec(rho0), liouv.dim)


# ----------------------------------------------------------------------
# Detection channels and the oracle spectrum.

def detection_operators(p: ModelParams) -> list[np.ndarray]:
    """Reduced detection operators for the three effective photon modes.

    Mode 0 is the driven dipole axis (lowering operator dressed by the
    frozen-atom phase shifts); modes 1, 2 carry the realized scattering
    amplitudes as level-diagonal operators.  Every other photon mode
    couples trivially and drops out of the total spectrum.
    """
    if not p.omega2 > 0:
        raise ValueError("detection operators need omega2 > 0 (the dipole "
                         "channel carries a 1/omega normalization)")
    omega = math.sqrt(p.omega2)
    d1 = np.array([
        [-1j * cmath.exp(1j * p.delta_plus) * math.sin(p.delta_plus), 0.0],
        [cmath.exp(-1j * p.laser_phase) / omega,
         -1j * cmath.exp(1j * p.delta_minus) * math.sin(p.delta_minus)],
    ], dtype=complex)
    gp, gm = gram_realization(p)
    ops = [d1]
    for a in range(2):
        ops.append(np.diag([gp[a], gm[a]]).astype(complex))
    return ops


@lru_cache(maxsize=128)
def _oracle_context(p: ModelParams):
    liouv = build_liouvillian_2lvl(p)
    gen = build_K_super(p)
    rho = steady_state_super(liouv)
    ops = detection_operators(p)
    rhs = np.stack([vec(d @ rho) for d in ops], axis=1)        # (4, 3)
    conj_ops = np.stack([vec(d).conj() for d in ops], axis=1)  # (4, 3)
    # Abscissa of convergence of the damped semigroup integral.  The
    # generator may have (mildly) positive growth at large bandwidth with
    # detuning; what the resolvent replacement needs is Re q beyond it.
    spectral_bound = float(eigvals(gen.matrix)[-1].real)
    return gen, rho, rhs, conj_ops, spectral_bound


def _require_convergent(p: ModelParams, spectral_bound: float) -> None:
    damping = 0.5 * (p.gamma + p.y)
    if not damping > spectral_bound:
        raise ArithmeticError(
            f"resolvent outside the convergence half-plane: Re q = "
            f"{damping:.3e} <= spectral bound {spectral_bound:.3e}")


def sigma_oracle_grid(p: ModelParams, xs) -> np.ndarray:
    """Oracle total spectrum over a grid: one 4x4 resolvent solve per
    detection mode and frequency, summed and symmetrized."""
    require_valid(p)
    gen, _, rhs, conj_ops, bound = _oracle_context(p)
    _require_convergent(p, bound)
    xs = np.asarray(xs, dtype=float)
    q = 0.5 * (p.gamma + p.y) + 1j * (xs - p.z)
    m = q[:, None, None] * np.eye(4) - gen.matrix[None, :, :]
    sol = solve_stacked(m, np.broadcast_to(rhs, (len(xs), 4, 3)))
    bracket = np.einsum("nik,ik->n", sol, conj_ops)
    return p.omega2 / math.pi * bracket.real


def sigma_oracle(p: ModelParams, x: float) -> float:
    """Scalar oracle evaluation (deterministic LU path)."""
    require_valid(p)
    gen, _, rhs, conj_ops, bound = _oracle_context(p)
    _require_convergent(p, bound)
    q = complex(0.5 * (p.gamma + p.y), x - p.z)
    sol = solve_linear(q * np.eye(4) - gen.matrix, rhs)
    bracket = complex(np.einsum("ik,ik->", sol, conj_ops))
    return float(p.omega2 / math.pi * bracket.real)


def sigma_time_domain(p: ModelParams, x: float, horizon: float = 200.0,
                      tol: float = 1e-10, memo: dict | None = None) -> float:
    """Time-domain evaluation of the spectrum integral.

    Adaptive quadrature of the damped two-time kernel over [0, horizon]
    with the semigroup evaluated by matrix exponentials — an oracle for
    the resolvent replacement used everywhere else.  Pass a shared
    ``memo`` to reuse exponentials across frequencies.
    """
    from .linalg import integrate_adaptive

    require_valid(p)
    gen, _, rhs, conj_ops, bound = _oracle_context(p)
    _require_convergent(p, bound)
    q = complex(0.5 * (p.gamma + p.y), x - p.z)
    if memo is None:
        memo = {}

    def integrand(t: float) -> float:
        e = semigroup(gen.matrix, t, memo)
        bracket = complex(np.einsum("ik,ik->", e @ rhs, conj_ops))
        return (cmath.exp(-q * t) * bracket).real

    value = integrate_adaptive(integrand, 0.0, horizon, tol)
    return p.omega2 / math.pi * value


class ChannelSolver:
    """Single-frequency resolvent with a cached factorization.

    Evaluates the spectrum of arbitrary detection channels at one x; used
    by the angular integrals, which sweep the channel while q stays fixed.
    """

    def __init__(self, p: ModelParams, x: float):
        require_valid(p)
        gen, rho, _, _, bound = _oracle_context(p)
        _require_convergent(p, bound)
        q = complex(0.5 * (p.gamma + p.y), x - p.z)
        self.params = p
        self.rho = rho
        self._lu = scipy.linalg.lu_factor(q * np.eye(4) - gen.matrix)

    def spectrum(self, d_op: np.ndarray) -> float:
        """(omega2/pi) Re Tr{D^dag (q - K)^-1 [D rho_inf]} for channel D."""
        sol = scipy.linalg.lu_solve(self._lu, vec(d_op @ self.rho))
        bracket = complex(np.vdot(vec(d_op), sol))
        return float(self.params.omega2 / math.pi * bracket.real)


# ----------------------------------------------------------------------
# Complete-positivity diagnostics.

def hermitian_basis(n: int) -> list[np.ndarray]:
    """Orthonormal Hermitian operator basis with the identity first."""
    basis = [np.eye(n, dtype=complex) / math.sqrt(n)]
    for i in range(n):
        for j in range(i + 1, n):
            sym = np.zeros((n, n), dtype=complex)
            sym[i, j] = sym[j, i] = 1.0 / math.sqrt(2.0)
            basis.append(sym)
            asym = np.zeros((n, n), dtype=complex)
            asym[i, j] = -1j / math.sqrt(2.0)
            asym[j, i] = 1j / math.sqrt(2.0)
            basis.append(asym)
    for k in range(1, n):
        diag = np.zeros(n, dtype=complex)
        diag[:k] = 1.0
        diag[k] = -k
        basis.append(np.diag(diag) / math.sqrt(k * (k + 1)))
    return basis


def _choi(matrix: np.ndarray, n: int) -> np.ndarray:
    return matrix.reshape(n, n, n, n).transpose(3, 1, 2, 0).reshape(n * n, n * n)


def dissipation_spectrum(liouv: Superoperator) -> np.ndarray:
    """Eigenvalues of the dissipative part's Choi-type matrix, ascending.

    The generator's Choi matrix is expanded over the Hermitian operator
    basis; the identity row and column (the Hamiltonian commutator,
    identified by its antisymmetry under the Choi transpose, plus the
    anticommutator bookkeeping) is removed and the Hermitian part of the
    remainder diagonalized.  For a generator in Lindblad form this block
    is exactly the jump-rate matrix and is positive semidefinite; a pure
    decay channel at unit rate gives {rate, 0, 0, 0}.
    """
    n = liouv.dim
    basis = hermitian_basis(n)
    u = np.stack([vec(b) for b in basis], axis=1)
    coeff = u.conj().T @ _choi(liouv.matrix, n) @ u
    coeff[0, :] = 0.0
    coeff[:, 0] = 0.0
    coeff = 0.5 * (coeff + coeff.conj().T)
    return np.linalg.eigvalsh(coeff)


def hermiticity_defect(liouv: Superoperator) -> float:
    """Spectral norm of the anti-Hermitian part of the generator's Choi.

    Zero iff the map preserves Hermiticity; any nonzero value already
    rules out a Lindblad form (and positivity preservation), regardless of
    the jump-rate eigenvalues.
    """
    choi = _choi(liouv.matrix, liouv.dim)
    anti = 0.5 * (choi - choi.conj().T)
    return float(np.linalg.norm(anti, 2))


def cp_check(liouv: Superoperator) -> float:
    """Most negative eigenvalue of the dissipative Choi-type matrix.

    Returns the smaller of the minimum jump-rate eigenvalue
    (:func:`dissipation_spectrum`) and minus the hermiticity defect of the
    Choi matrix: a generator whose Choi is not Hermitian cannot generate a
    positivity-preserving semigroup, and the defect norm is the size of
    the obstruction.  Nonnegative (to rounding) exactly for generators in
    Lindblad form; the bandwidth-dressed spectrum generator fails with a
    defect equal to the bandwidth.
    """
    return float(min(dissipation_spectrum(liouv)[0],
                     -hermiticity_defect(liouv)))
