"""Model parameters, derived quantities, and the closed-form stationary state.

Reduced units throughout: rates and frequencies are measured in units of
the natural line width of the transition, time in its inverse.  The laser
intensity enters through ``omega2`` (the square of the reduced Rabi
amplitude), ``z`` is the reduced laser detuning from the atomic line,
``y`` the reduced laser bandwidth (Lorentzian line), ``gamma`` the reduced
instrumental width of the detector.

The direct-scattering channel — light scattered by the atom as a whole,
without an absorption/emission cycle — is parametrized by two phase
shifts ``delta_plus``/``delta_minus`` (atom frozen in the upper/lower
level), the Gram data of the two residual scattering amplitudes
(``g_plus_norm2``, ``g_minus_norm2``, ``g_inner``) and an intensity-shift
parameter ``epsilon``.  Only this Gram data enters the total spectrum;
function-space realizations live in :mod:`fluorspec.angular`.

Two-level basis convention (used package-wide): index 0 = upper stretched
state, index 1 = lower stretched state.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .linalg import solve_linear

__all__ = [
    "ModelParams", "DerivedParams", "SteadyState", "Violation",
    "validate", "require_valid", "derive", "steady_state",
    "build_G", "build_K", "usual_part", "PARAM_KEYS",
    "read_param_file", "params_to_mapping", "params_from_mapping",
    "DegenerateSteadyStateError", "ParamFileError", "InvalidParamsError",
]

# Tolerance below which ||g_+ - g_-||^2 counts as exactly zero.
_DG_ZERO_RTOL = 1e-15


@dataclass(frozen=True)
class ModelParams:
    """Reduced physical inputs of the driven-atom model.

    All fields are dimensionless (units of the natural line width).
    ``laser_phase`` is the global phase of the driving field; it must
    cancel in every spectrum and is kept only as a testable knob.
    """

    gamma: float
    omega2: float
    z: float
    y: float
    delta_plus: float = 0.0
    delta_minus: float = 0.0
    g_plus_norm2: float = 0.0
    g_minus_norm2: float = 0.0
    g_inner: complex = 0j
    epsilon: float = 0.0
    laser_phase: float = 0.0

    def without_corrections(self) -> "ModelParams":
        """The same drive/detection settings with the direct-scattering
        channel switched off (phase shifts, amplitudes and shift zeroed)."""
        return replace(self, delta_plus=0.0, delta_minus=0.0,
                       g_plus_norm2=0.0, g_minus_norm2=0.0,
                       g_inner=0j, epsilon=0.0)

    def has_corrections(self) -> bool:
        return any((self.delta_plus, self.delta_minus, self.g_plus_norm2,
                    self.g_minus_norm2, self.g_inner, self.epsilon))


@dataclass(frozen=True)
class Violation:
    """One violated parameter invariant; data, not an exception."""

    name: str
    message: str

    def __str__(self) -> str:
        return f"{self.name}: {self.message}"


class InvalidParamsError(ValueError):
    """Raised by operations whose precondition is a clean validate()."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class DegenerateSteadyStateError(RuntimeError):
    """The stationary-state denominator vanished (cannot happen for
    validated parameters; guarded anyway)."""


def validate(p: ModelParams) -> list[Violation]:
    """Check every parameter invariant; returns all violations (empty = ok)."""
    out: list[Violation] = []
    numbers = {
        "gamma": p.gamma, "omega2": p.omega2, "z": p.z, "y": p.y,
        "delta_plus": p.delta_plus, "delta_minus": p.delta_minus,
        "g_plus_norm2": p.g_plus_norm2, "g_minus_norm2": p.g_minus_norm2,
        "epsilon": p.epsilon, "laser_phase": p.laser_phase,
    }
    for key, value in numbers.items():
        if not math.isfinite(value):
            out.append(Violation("finite", f"{key} = {value} is not finite"))
    if not (math.isfinite(p.g_inner.real) and math.isfinite(p.g_inner.imag)):
        out.append(Violation("finite", f"g_inner = {p.g_inner} is not finite"))
    if out:
        return out

    for key in ("gamma", "omega2", "y", "g_plus_norm2", "g_minus_norm2"):
        value = numbers[key]
        if value < 0:
            out.append(Violation("nonnegative", f"{key} = {value} must be >= 0"))

    bound = math.sqrt(max(p.g_plus_norm2, 0.0) * max(p.g_minus_norm2, 0.0))
    if abs(p.g_inner) > bound * (1.0 + 1e-12):
        out.append(Violation(
            "cauchy-schwarz",
            f"|g_inner| = {abs(p.g_inner):.6g} exceeds "
            f"sqrt(g_plus_norm2 * g_minus_norm2) = {bound:.6g}"))

    dgn2 = _dg_norm2(p)
    if _dg_is_zero(p, dgn2) and p.epsilon != 0.0:
        out.append(Violation(
            "epsilon-with-zero-dg",
            f"||g_+ - g_-||^2 = 0 forces epsilon = 0, got {p.epsilon}"))

    if not p.gamma + p.y > 0:
        out.append(Violation(
            "gamma-plus-y",
            f"gamma + y = {p.gamma + p.y} must be > 0 (at gamma = y = 0 the "
            "elastic line is a delta distribution, outside this model)"))
    return out


def require_valid(p: ModelParams) -> None:
    violations = validate(p)
    if violations:
        raise InvalidParamsError(violations)


def _dg_norm2(p: ModelParams) -> float:
    return p.g_plus_norm2 + p.g_minus_norm2 - 2.0 * p.g_inner.real


def _dg_is_zero(p: ModelParams, dgn2: float) -> bool:
    scale = p.g_plus_norm2 + p.g_minus_norm2
    return dgn2 <= _DG_ZERO_RTOL * scale


@dataclass(frozen=True)
class DerivedParams:
    """Combinations of :class:`ModelParams` used by every formula.

    ``s`` is the phase-shift difference, ``z_tilde`` the intensity-shifted
    detuning, ``dg_norm2`` = ||g_+ - g_-||^2, and the ``inner_*`` fields
    the Gram products against dg = g_+ - g_-.  ``b`` is the complex
    damping entry of the coherence block and ``gamma2_cap`` the squared
    width entering the stationary-state denominator.
    """

    s: float
    z_tilde: float
    dg_norm2: float
    inner_dg_gminus: complex   # <dg | g_->
    inner_gminus_dg: complex   # <g_- | dg>
    inner_dg_gplus: complex    # <dg | g_+>
    b: complex
    gamma2_cap: float


def derive(p: ModelParams) -> DerivedParams:
    """Compute the derived parameter block (precondition: validate ok)."""
    require_valid(p)
    s = p.delta_plus - p.delta_minus
    z_tilde = p.z - p.omega2 * p.epsilon
    dgn2 = max(_dg_norm2(p), 0.0)
    # <dg|g_-> = <g_+|g_-> - ||g_-||^2 ; <g_-|dg> is its conjugate;
    # <dg|g_+> = ||g_+||^2 - <g_-|g_+>.
    inner_dg_gminus = p.g_inner - p.g_minus_norm2
    inner_gminus_dg = inner_dg_gminus.conjugate()
    inner_dg_gplus = p.g_plus_norm2 - p.g_inner.conjugate()
    b = (0.5 * (1.0 + p.y + p.omega2 * (dgn2 + math.sin(s) ** 2))
         - 1j * (z_tilde + 0.25 * p.omega2 * math.sin(2.0 * s)))
    u = 1.0 + p.y + p.omega2 * dgn2
    gamma2_cap = u * u + p.omega2 * (2.0 + 2.0 * p.y + 2.0 * p.omega2 * dgn2
                                     + p.omega2 * math.sin(s) ** 2)
    return DerivedParams(s=s, z_tilde=z_tilde, dg_norm2=dgn2,
                         inner_dg_gminus=inner_dg_gminus,
                         inner_gminus_dg=inner_gminus_dg,
                         inner_dg_gplus=inner_dg_gplus,
                         b=b, gamma2_cap=gamma2_cap)


@dataclass(frozen=True)
class SteadyState:
    """Stationary state of the driven atom.

    ``d`` is the closed-form complex amplitude; ``d_vec`` = (Re d, d,
    conj d) is the vector solving G d_vec = w; ``rho_inf`` the 2x2 density
    matrix on (upper, lower) with Tr = 1 exactly by construction.
    """

    d: complex
    d_vec: np.ndarray
    rho_inf: np.ndarray


def steady_state(dp: DerivedParams, p: ModelParams) -> SteadyState:
    denom = 4.0 * dp.z_tilde ** 2 + dp.gamma2_cap
    if denom < 1e-14:
        raise DegenerateSteadyStateError(
            f"4 z_tilde^2 + Gamma^2 = {denom:.3e} is numerically zero")
    num_re = 1.0 + p.y + p.omega2 * (dp.dg_norm2 + math.sin(dp.s) ** 2)
    num_im = 2.0 * dp.z_tilde - p.omega2 * math.sin(dp.s) * math.cos(dp.s)
    d = complex(num_re, num_im) / denom
    d_vec = np.array([d.real, d, d.conjugate()], dtype=complex)
    omega = math.sqrt(p.omega2)
    phase = cmath.exp(1j * (p.laser_phase + 2.0 * p.delta_minus))
    pop = p.omega2 * d.real
    rho = np.array([
        [pop, omega * phase * d],
        [omega * phase.conjugate() * d.conjugate(), 1.0 - pop],
    ], dtype=complex)
    return SteadyState(d=d, d_vec=d_vec, rho_inf=rho)


def build_G(dp: DerivedParams, p: ModelParams) -> np.ndarray:
    """Drift matrix of the stationary-state system G d = w, w = (0, 1/2, 1/2)."""
    eis = cmath.exp(1j * dp.s)
    coupling = p.omega2 * math.cos(dp.s)
    return np.array([
        [1.0, -0.5, -0.5],
        [coupling * eis, dp.b, 0.0],
        [coupling * eis.conjugate(), 0.0, dp.b.conjugate()],
    ], dtype=complex)


def build_K(dp: DerivedParams, p: ModelParams) -> np.ndarray:
    """Spectrum drift matrix: G plus the bandwidth term y diag(0, 1, -1)."""
    k = build_G(dp, p)
    k[1, 1] += p.y
    k[2, 2] -= p.y
    return k


STEADY_RHS = np.array([0.0, 0.5, 0.5], dtype=complex)


def steady_state_from_solve(dp: DerivedParams, p: ModelParams) -> np.ndarray:
    """d_vec obtained by solving G d = w numerically (cross-check route)."""
    return solve_linear(build_G(dp, p), STEADY_RHS)


def usual_part(p: ModelParams) -> ModelParams:
    """Alias of :meth:`ModelParams.without_corrections` for CLI wiring."""
    return p.without_corrections()


# ----------------------------------------------------------------------
# Parameter file format: flat "key = value" lines, '#' comments allowed.

PARAM_KEYS = (
    "gamma", "omega2", "z", "y", "delta_plus", "delta_minus",
    "g_plus_norm2", "g_minus_norm2", "g_inner_re", "g_inner_im",
    "epsilon", "laser_phase",
)

_OPTIONAL_KEYS = frozenset({"laser_phase"})


class ParamFileError(ValueError):
    """Malformed or incomplete parameter file."""


def params_from_mapping(values: dict) -> ModelParams:
    unknown = set(values) - set(PARAM_KEYS)
    if unknown:
        raise ParamFileError(f"unknown keys: {', '.join(sorted(unknown))}")
    missing = set(PARAM_KEYS) - set(values) - _OPTIONAL_KEYS
    if missing:
        raise ParamFileError(f"missing keys: {', '.join(sorted(missing))}")
    num = {}
    for key, raw in values.items():
        try:
            num[key] = float(raw)
        except (TypeError, ValueError) as exc:
            raise ParamFileError(f"key {key}: {raw!r} is not a number") from exc
    return ModelParams(
        gamma=num["gamma"], omega2=num["omega2"], z=num["z"], y=num["y"],
        delta_plus=num["delta_plus"], delta_minus=num["delta_minus"],
        g_plus_norm2=num["g_plus_norm2"], g_minus_norm2=num["g_minus_norm2"],
        g_inner=complex(num["g_inner_re"], num["g_inner_im"]),
        epsilon=num["epsilon"], laser_phase=num.get("laser_phase", 0.0),
    )


def params_to_mapping(p: ModelParams) -> dict:
    return {
        "gamma": p.gamma, "omega2": p.omega2, "z": p.z, "y": p.y,
        "delta_plus": p.delta_plus, "delta_minus": p.delta_minus,
        "g_plus_norm2": p.g_plus_norm2, "g_minus_norm2": p.g_minus_norm2,
        "g_inner_re": p.g_inner.real, "g_inner_im": p.g_inner.imag,
        "epsilon": p.epsilon, "laser_phase": p.laser_phase,
    }


def read_param_file(path) -> ModelParams:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        sep = "=" if "=" in stripped else (":" if ":" in stripped else None)
        if sep is None:
            raise ParamFileError(f"line {lineno}: expected 'key = value'")
        key, _, raw = stripped.partition(sep)
        key = key.strip()
        if key in values:
            raise ParamFileError(f"line {lineno}: duplicate key {key}")
        values[key] = raw.strip()
    return params_from_mapping(values)
