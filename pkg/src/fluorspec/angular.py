"""Direction- and polarization-resolved spectra.

The detected light at polar angle theta splits into right/left circular
channels.  Each channel operator combines the dipole emission pattern
(1 +- cos theta) acting through the dressed lowering operator with the
direct-scattering amplitudes g(theta; +-), which are free functions of the
model constrained only by orthogonality to the dipole mode:

    int_0^pi sin(t) [(1 + cos t) g(t; +) - (1 - cos t) g(t; -)] dt = 0.

We realize them on a small orthonormal family of real polynomial profiles
in cos(theta) (one pair of polarization components per abstract axis,
orthogonalized against the dipole pattern), with complex coefficients
fitted to the configured Gram data.  Complex coefficients on real axes
span every Gram matrix the validator admits.  The total spectrum is
family independent — closure of the solid-angle integral onto the total
spectrum is an identity and is enforced by tests — while the angular
shapes are not, so the family id travels with the output.

Azimuthal symmetry is structural: no phi argument exists anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .linalg import integrate_adaptive
from .model import ModelParams, derive, require_valid, steady_state
from .superop import ChannelSolver, detection_operators, gram_realization

__all__ = [
    "AngularProfileSet", "PROFILE_FAMILIES", "build_profiles",
    "sigma_angular", "integrate_solid_angle", "GramNotRealizableError",
]

# sqrt(3/(8 pi)) / 2: coefficient of the dipole channel, normalized so the
# two polarizations integrate to unity over the sphere.
_DIPOLE_COEFF = 0.25 * math.sqrt(3.0 / (2.0 * math.pi))


class GramNotRealizableError(ValueError):
    """The requested Gram data admits no realization (Cauchy-Schwarz)."""


# Raw profile candidates per family: pairs of polynomial coefficient
# tuples (plus-polarization, minus-polarization) in c = cos(theta),
# orthogonalized below against the dipole pair ((1+c), -(1-c)).
PROFILE_FAMILIES = {
    "poly-even": [((1.0,), (1.0,)), ((0.0, 1.0), (0.0, 1.0))],
    "poly-skew": [((1.0,), (-1.0,)), ((0.0, 1.0), (0.0, -1.0))],
}

DEFAULT_FAMILY = "poly-even"


def _pair_inner(a, b) -> float:
    """2 pi * int_{-1}^{1} (a+ b+ + a- b-) dc for real polynomial pairs."""
    total = 0.0
    for pa, pb in zip(a, b):
        prod = (pa * pb).integ()
        total += prod(1.0) - prod(-1.0)
    return 2.0 * math.pi * total


def _orthonormal_axes(family: str) -> list[tuple[Polynomial, Polynomial]]:
    try:
        raw = PROFILE_FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown profile family {family!r}; "
                         f"choose from {sorted(PROFILE_FAMILIES)}") from None
    dipole = (Polynomial([1.0, 1.0]), Polynomial([-1.0, 1.0]))  # (1+c, -(1-c))
    axes: list[tuple[Polynomial, Polynomial]] = []
    for coeffs_plus, coeffs_minus in raw:
        cand = [Polynomial(list(coeffs_plus)), Polynomial(list(coeffs_minus))]
        for other in [dipole, *axes]:
            overlap = _pair_inner(cand, other) / _pair_inner(other, other)
            cand = [cp - overlap * op for cp, op in zip(cand, other)]
        norm2 = _pair_inner(cand, cand)
        if norm2 < 1e-12:
            raise ValueError(
                f"profile family {family!r} degenerates after "
                "orthogonalization against the dipole pattern")
        scale = 1.0 / math.sqrt(norm2)
        axes.append((cand[0] * scale, cand[1] * scale))
    return axes


@dataclass(frozen=True)
class AngularProfileSet:
    """Realized angular amplitudes g(theta; +-) for both level channels.

    ``axes`` are orthonormal constraint-satisfying profile pairs;
    ``coeffs[eps, a]`` are the complex components of g_eps on axis a, so
    norms and inner products of the amplitudes reproduce the Gram data
    exactly.  An empty axis list encodes g identically zero.
    """

    family: str
    axes: tuple[tuple[Polynomial, Polynomial], ...]
    coeffs: np.ndarray  # shape (2, n_axes); row 0 = upper channel (g_+)

    def amplitude(self, eps: int, theta: float, pol: int) -> complex:
        """g_eps(theta; pol); eps/pol are +1 (upper/right) or -1."""
        if not self.axes:
            return 0j
        row = 0 if eps > 0 else 1
        comp = 0 if pol > 0 else 1
        c = math.cos(theta)
        return complex(sum(self.coeffs[row, a] * self.axes[a][comp](c)
                           for a in range(len(self.axes))))

    def constraint_residual(self, eps: int, tol: float = 1e-12) -> float:
        """Quadrature check of the dipole-orthogonality constraint."""
        def f(theta: float) -> float:
            c = math.cos(theta)
            val = ((1.0 + c) * self.amplitude(eps, theta, +1)
                   - (1.0 - c) * self.amplitude(eps, theta, -1))
            return math.sin(theta) * val.real
        def g(theta: float) -> float:
            c = math.cos(theta)
            val = ((1.0 + c) * self.amplitude(eps, theta, +1)
                   - (1.0 - c) * self.amplitude(eps, theta, -1))
            return math.sin(theta) * val.imag
        re = integrate_adaptive(f, 0.0, math.pi, tol)
        im = integrate_adaptive(g, 0.0, math.pi, tol)
        return abs(complex(re, im))


def build_profiles(p: ModelParams,
                   family: str = DEFAULT_FAMILY) -> AngularProfileSet:
    """Fit the default (or named) profile family to the model's Gram data."""
    require_valid(p)
    bound = math.sqrt(max(p.g_plus_norm2, 0.0) * max(p.g_minus_norm2, 0.0))
    if abs(p.g_inner) > bound * (1.0 + 1e-12):
        raise GramNotRealizableError(
            f"|<g+|g->| = {abs(p.g_inner):.3e} exceeds the norm bound {bound:.3e}")
    if p.g_plus_norm2 == 0.0 and p.g_minus_norm2 == 0.0:
        return AngularProfileSet(family=family, axes=(),
                                 coeffs=np.zeros((2, 0), dtype=complex))
    gp, gm = gram_realization(p)
    return AngularProfileSet(family=family,
                             axes=tuple(_orthonormal_axes(family)),
                             coeffs=np.stack([gp, gm]))


def _channel_operator(p: ModelParams, profiles: AngularProfileSet,
                      theta: float, pol: int) -> np.ndarray:
    dipole = detection_operators(p)[0]
    sign = 1.0 if pol > 0 else -1.0
    weight = sign * _DIPOLE_COEFF * (1.0 + sign * math.cos(theta))
    op = weight * dipole
    op[0, 0] += profiles.amplitude(+1, theta, pol)
    op[1, 1] += profiles.amplitude(-1, theta, pol)
    return op


def sigma_angular(p: ModelParams, profiles: AngularProfileSet, x: float,
                  theta: float, pol: int) -> float:
    """Spectrum density per solid angle in one circular channel.

    ``theta`` must lie in (0, pi] — the transmitted beam direction is
    excluded; ``pol`` is +1 for the right-circular channel, -1 for left.
    """
    if not 0.0 < theta <= math.pi:
        raise ValueError(f"theta must be in (0, pi], got {theta}")
    if pol not in (+1, -1):
        raise ValueError("pol must be +1 or -1")
    solver = ChannelSolver(p, x)
    return solver.spectrum(_channel_operator(p, profiles, theta, pol))


def integrate_solid_angle(p: ModelParams, profiles: AngularProfileSet,
                          x: float, tol: float = 1e-8) -> float:
    """Solid-angle integral of both channels; closes onto the total spectrum."""
    require_valid(p)
    if p.omega2 == 0.0:
        return 0.0
    solver = ChannelSolver(p, x)

    def integrand(theta: float) -> float:
        if theta <= 0.0 or theta >= math.pi:
            # sin(theta) kills the endpoints; skip the channel build.
            return 0.0
        total = sum(solver.spectrum(_channel_operator(p, profiles, theta, pol))
                    for pol in (+1, -1))
        return math.sin(theta) * total

    return 2.0 * math.pi * integrate_adaptive(integrand, 0.0, math.pi, tol)
