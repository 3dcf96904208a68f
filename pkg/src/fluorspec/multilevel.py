"""Full degenerate-level atom: angular-momentum machinery and reduction.

The two levels carry total angular momenta f_minus and f_plus = f_minus+1
(electric dipole, opposite parities).  Basis order: lower-level sublevels
first, by increasing magnetic number, then the upper level likewise.
Circularly polarized driving pumps the atom up the magnetic ladder, so the
stationary state concentrates on the two stretched states — the
justification for the package's two-level closed forms, verified here by
direct propagation.

Clebsch-Gordan coefficients use the standard real (Condon-Shortley)
convention and are evaluated from the factorial sum with exact rational
arithmetic before the final square root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .model import ModelParams, require_valid
from .superop import (Superoperator, _block_coefficients, sandwich,
                      semigroup, superop_from_action, unvec, vec)

__all__ = [
    "AtomLevels", "DecayOperators", "cg_coefficient",
    "build_decay_operators", "build_vacuum_liouvillian",
    "build_driven_liouvillian", "steady_state_full", "SteadyStateReport",
    "extreme_indices", "extreme_block_superop",
    "InvalidQuantumNumbersError", "NonConvergenceError",
]


class InvalidQuantumNumbersError(ValueError):
    """Angular momentum arguments are not consistent half-integers."""


class NonConvergenceError(RuntimeError):
    """Long-time propagation did not settle to the stated tolerance."""


def _half_int(x, name: str) -> Fraction:
    doubled = 2 * Fraction(x).limit_denominator(4)
    if doubled.denominator != 1 or abs(float(doubled) - 2 * float(x)) > 1e-9:
        raise InvalidQuantumNumbersError(f"{name} = {x} is not a half-integer")
    return Fraction(doubled.numerator, 2)


def cg_coefficient(j1, m1, j2, m2, J, M) -> float:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>.

    Returns 0 when M != m1 + m2 or the triangle rule fails; raises
    :class:`InvalidQuantumNumbersError` for arguments that are not valid
    half-integers or have |m| > j.
    """
    j1, m1 = _half_int(j1, "j1"), _half_int(m1, "m1")
    j2, m2 = _half_int(j2, "j2"), _half_int(m2, "m2")
    J, M = _half_int(J, "J"), _half_int(M, "M")
    for j, m, nm in ((j1, m1, "m1"), (j2, m2, "m2"), (J, M, "M")):
        if j < 0:
            raise InvalidQuantumNumbersError(f"negative angular momentum {j}")
        if abs(m) > j or (j - m).denominator != 1:
            raise InvalidQuantumNumbersError(
                f"{nm} = {m} incompatible with its angular momentum {j}")
    if M != m1 + m2:
        return 0.0
    if J < abs(j1 - j2) or J > j1 + j2 or (j1 + j2 - J).denominator != 1:
        return 0.0

    def fact(x: Fraction) -> int:
        if x.denominator != 1 or x < 0:
            raise InvalidQuantumNumbersError(f"factorial of {x}")
        return math.factorial(int(x))

    pref = (Fraction(2 * J + 1)
            * fact(j1 + j2 - J) * fact(j1 - j2 + J) * fact(-j1 + j2 + J)
            * fact(J + M) * fact(J - M)
            * fact(j1 - m1) * fact(j1 + m1) * fact(j2 - m2) * fact(j2 + m2)
            / fact(j1 + j2 + J + 1))
    k_min = int(max(0, j2 - J - m1, j1 + m2 - J))
    k_max = int(min(j1 + j2 - J, j1 - m1, j2 + m2))
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        total += Fraction((-1) ** k,
                          fact(Fraction(k)) * fact(j1 + j2 - J - k)
                          * fact(j1 - m1 - k) * fact(j2 + m2 - k)
                          * fact(J - j2 + m1 + k) * fact(J - j1 - m2 + k))
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    return sign * math.sqrt(float(pref * total * total))


@dataclass(frozen=True)
class AtomLevels:
    """The f_minus -> f_plus = f_minus + 1 level pair."""

    f_minus: float

    def __post_init__(self):
        f = _half_int(self.f_minus, "f_minus")
        if f < 0:
            raise InvalidQuantumNumbersError(f"f_minus = {self.f_minus} < 0")

    @property
    def f_plus(self) -> float:
        return self.f_minus + 1.0

    @property
    def dim_minus(self) -> int:
        return round(2 * self.f_minus) + 1

    @property
    def dim_plus(self) -> int:
        return round(2 * self.f_minus) + 3

    @property
    def dim(self) -> int:
        return self.dim_minus + self.dim_plus


def extreme_indices(levels: AtomLevels) -> tuple[int, int]:
    """(upper stretched, lower stretched) indices in the full basis."""
    return levels.dim - 1, levels.dim_minus - 1


@lru_cache(maxsize=16)
def _projectors(levels: AtomLevels) -> tuple[np.ndarray, np.ndarray]:
    n_m, n = levels.dim_minus, levels.dim
    p_low = np.zeros((n, n), dtype=complex)
    p_low[:n_m, :n_m] = np.eye(n_m)
    p_up = np.eye(n, dtype=complex) - p_low
    return p_up, p_low


@dataclass(frozen=True)
class DecayOperators:
    """Spontaneous-emission channels A_m, m in (-1, 0, +1).

    ``rect[m]`` maps the upper block to the lower one (dim_minus x
    dim_plus); ``embedded(m)`` places it in the full space.  The channels
    resolve the upper projector: sum_m A_m^dag A_m = P_up.
    """

    levels: AtomLevels
    rect: dict

    def embedded(self, m: int) -> np.ndarray:
        n = self.levels.dim
        out = np.zeros((n, n), dtype=complex)
        out[:self.levels.dim_minus, self.levels.dim_minus:] = self.rect[m]
        return out


@lru_cache(maxsize=16)
def build_decay_operators(levels: AtomLevels) -> DecayOperators:
    f_m, f_p = levels.f_minus, levels.f_plus
    n_m, n_p = levels.dim_minus, levels.dim_plus
    rect = {}
    for m in (-1, 0, 1):
        a = np.zeros((n_m, n_p), dtype=complex)
        for i in range(n_m):
            m1 = -f_m + i
            mm = m1 + m  # upper-level magnetic number reached by channel m
            j = round(mm + f_p)
            if 0 <= j < n_p:
                a[i, j] = cg_coefficient(f_m, m1, 1, m, f_p, mm)
        rect[m] = a
    return DecayOperators(levels=levels, rect=rect)


def build_vacuum_liouvillian(levels: AtomLevels,
                             omega0: float = 0.0) -> Superoperator:
    """Spontaneous emission only (field in vacuum), unit decay rate.

    ``omega0`` is the bare level splitting; only differences matter at
    this layer, so it defaults to 0 in the rotating bookkeeping.
    """
    p_up, _ = _projectors(levels)
    ops = build_decay_operators(levels)
    a_ms = [ops.embedded(m) for m in (-1, 0, 1)]

    def action(rho):
        out = -0.5j * omega0 * ((2.0 * p_up - np.eye(levels.dim)) @ rho
                                - rho @ (2.0 * p_up - np.eye(levels.dim)))
        out -= 0.5 * (p_up @ rho + rho @ p_up)
        for a in a_ms:
            out += a @ rho @ a.conj().T
        return out

    return superop_from_action(levels.dim, action)


def build_driven_liouvillian(levels: AtomLevels,
                             p: ModelParams) -> Superoperator:
    """Driven-atom Liouvillian on the full sublevel space (block form).

    Same block structure as the two-level builder, with the stretched-state
    lowering operator replaced by the full sigma-plus-polarized decay
    channel; restricting to the two stretched states reproduces the
    two-level matrix exactly (tested).
    """
    require_valid(p)
    p_up, p_low = _projectors(levels)
    ops = build_decay_operators(levels)
    a_ms = [ops.embedded(m) for m in (-1, 0, 1)]
    a1 = ops.embedded(1)
    lm_coeff, lp_coeff, mu = _block_coefficients(p)
    # Drive channels: the sigma-plus lowering operator dressed by the
    # frozen-atom phase shifts; coefficients shared with the 2-level build.
    l_minus = lm_coeff * a1
    l_plus = lp_coeff * a1

    def action(rho):
        up = p_up @ rho @ p_up
        low = p_low @ rho @ p_low
        cross_lu = p_low @ rho @ p_up   # lower-upper coherence block
        cross_ul = p_up @ rho @ p_low
        out = -up - l_minus.conj().T @ cross_lu - cross_ul @ l_minus
        out += sum(a @ up @ a.conj().T for a in a_ms)
        out += l_minus @ cross_ul + cross_lu @ l_minus.conj().T
        block21 = l_plus @ up - low @ l_minus + mu * cross_lu
        dagger_image = (l_plus @ up.conj().T - low.conj().T @ l_minus
                        + mu * cross_ul.conj().T).conj().T
        return out + block21 + dagger_image

    return superop_from_action(levels.dim, action)


def extreme_block_superop(liouv: Superoperator,
                          levels: AtomLevels) -> np.ndarray:
    """Restrict a full-space superoperator to the stretched 2x2 block.

    Output uses the package's two-level convention (index 0 = upper
    stretched, 1 = lower stretched) so it compares directly with
    :func:`fluorspec.superop.build_liouvillian_2lvl`.
    """
    n = levels.dim
    i_up, i_low = extreme_indices(levels)
    pairs = [(i, j) for j in (i_up, i_low) for i in (i_up, i_low)]
    idx = [i + n * j for (i, j) in pairs]
    return liouv.matrix[np.ix_(idx, idx)]


@dataclass(frozen=True)
class SteadyStateReport:
    """Long-time state of the driven multilevel atom, with support data.

    ``off_extreme_population`` sums the sublevel populations outside the
    two stretched states; ``converged_delta`` is the max entry change over
    the final propagation leg (uniqueness is certified, not assumed).
    """

    rho: np.ndarray
    extreme_block: np.ndarray
    off_extreme_population: float
    converged_delta: float


def steady_state_full(levels: AtomLevels, p: ModelParams,
                      horizon: float = 1000.0, legs: int = 20,
                      tol: float = 1e-10) -> SteadyStateReport:
    """Propagate the maximally mixed state to its stationary point.

    Applies exp(L * horizon/legs) repeatedly; raises
    :class:`NonConvergenceError` if the last two legs still differ by more
    than ``tol``.  Requires omega2 > 0 (with no drive the lower manifold
    is degenerate and the stationary state is not unique).
    """
    require_valid(p)
    if not p.omega2 > 0:
        raise ValueError("steady_state_full needs omega2 > 0")
    liouv = build_driven_liouvillian(levels, p)
    n = levels.dim
    step = semigroup(liouv.matrix, horizon / legs)
    state = vec(np.eye(n, dtype=complex) / n)
    previous = state
    for _ in range(legs):
        previous = state
        state = step @ state
    delta = float(np.max(np.abs(state - previous)))
    if delta > tol:
        raise NonConvergenceError(
            f"successive propagations still differ by {delta:.3e} > {tol:.1e}")
    rho = unvec(state, n)
    rho = 0.5 * (rho + rho.conj().T)
    i_up, i_low = extreme_indices(levels)
    off_pop = float(sum(rho[i, i].real for i in range(n)
                        if i not in (i_up, i_low)))
    block = np.array([[rho[i_up, i_up], rho[i_up, i_low]],
                      [rho[i_low, i_up], rho[i_low, i_low]]], dtype=complex)
    return SteadyStateReport(rho=rho, extreme_block=block,
                             off_extreme_population=off_pop,
                             converged_delta=delta)
