"""Fluorescence spectrum of a laser-driven two-level atom.

Closed-form resolvent spectra for a degenerate two-level transition
driven by a phase-diffusion laser, with a direct-scattering channel on
top of the usual absorption/emission one.  Every closed form ships with
an independent cross-check: a superoperator oracle, time-domain
quadrature, Monte Carlo trajectories and the full magnetic-sublevel
model.
"""

from .model import (DerivedParams, ModelParams, SteadyState, Violation,
                    build_G, build_K, derive, read_param_file, steady_state,
                    validate)
from .spectrum import (SpectrumCurve, power, resolvent_vectors,
                       sigma_broadband, sigma_low_intensity, sigma_total,
                       sigma_total_grid, sigma_usual, strength)
from .superop import (Superoperator, build_K_super, build_liouvillian_2lvl,
                      cp_check, propagate, sigma_oracle, sigma_oracle_grid,
                      steady_state_super)
from .angular import AngularProfileSet, build_profiles, integrate_solid_angle, sigma_angular
from .multilevel import AtomLevels, cg_coefficient, steady_state_full
from .sme import TrajectoryConfig, ensemble_mean, simulate_trajectory

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "DerivedParams", "SteadyState", "Violation", "validate",
    "derive", "steady_state", "build_G", "build_K", "read_param_file",
    "SpectrumCurve", "sigma_total", "sigma_total_grid", "sigma_usual",
    "sigma_low_intensity", "sigma_broadband", "strength", "power",
    "resolvent_vectors", "Superoperator", "build_liouvillian_2lvl",
    "build_K_super", "steady_state_super", "sigma_oracle",
    "sigma_oracle_grid", "propagate", "cp_check", "AngularProfileSet",
    "build_profiles", "sigma_angular", "integrate_solid_angle",
    "AtomLevels", "cg_coefficient", "steady_state_full",
    "TrajectoryConfig", "simulate_trajectory", "ensemble_mean",
    "__version__",
]
