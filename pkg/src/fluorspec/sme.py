"""Trajectory integration of the phase-diffusion stochastic master equation.

Individual noise realizations of the laser phase drive the conditioned
state through

    d rho = L_B[rho] dt + (i/2) sqrt(y) [sigma_z, rho] dW,

whose ensemble mean obeys the deterministic master equation — the
property the Monte Carlo layer verifies against the matrix-exponential
propagator.

Scheme: Euler-Maruyama.  Strong order 0.5, but the acceptance quantity is
the mean, where weak order 1 applies; higher-order corrections to the
commutator noise vanish in the mean, so nothing finer is warranted.  The
state is carried as (upper population p, lower-upper coherence c) with
rho = [[p, conj(c)], [c, 1 - p]], which preserves the trace and
Hermiticity exactly at every step by construction — both increments are
traceless, and the noise touches only the coherence.  Positivity is not
exactly preserved by the scheme; excursions beyond -10*dt in the smallest
eigenvalue raise instead of being projected away (projection would bias
the mean).

Randomness comes from counter-based Philox streams (trajectory k uses key
seed + k), so ensembles are reproducible bit for bit and trivially
parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, require_valid
from .superop import build_liouvillian_2lvl

__all__ = [
    "TrajectoryConfig", "TrajectoryResult", "EnsembleResult",
    "simulate_trajectory", "ensemble_mean", "StepInstabilityError",
]

# Trajectories per vectorized batch; bounds the dW buffer to ~100 MB.
_BATCH = 2048


class StepInstabilityError(RuntimeError):
    """A state eigenvalue fell below -10*dt: the step is too coarse."""


@dataclass(frozen=True)
class TrajectoryConfig:
    dt: float
    n_steps: int
    seed: int
    n_traj: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.n_steps < 1 or self.n_traj < 1:
            raise ValueError("n_steps and n_traj must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")

    def check_stability(self, p: ModelParams) -> None:
        scale = max(1.0, p.y, p.omega2)
        if self.dt * scale > 0.05:
            raise ValueError(
                f"dt * max(1, y, omega2) = {self.dt * scale:.3g} exceeds the "
                "0.05 stability bound; reduce dt")

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class TrajectoryResult:
    times: np.ndarray
    rhos: np.ndarray  # (n_steps + 1, 2, 2)


@dataclass(frozen=True)
class EnsembleResult:
    """Entrywise mean path and standard errors across trajectories.

    ``se_pop`` is the standard error of the upper population; the
    coherence gets separate real/imaginary standard errors.
    """

    times: np.ndarray
    mean_pop: np.ndarray
    mean_coh: np.ndarray
    se_pop: np.ndarray
    se_coh_re: np.ndarray
    se_coh_im: np.ndarray
    n_traj: int

    def mean_rho(self, index: int) -> np.ndarray:
        p = self.mean_pop[index]
        c = self.mean_coh[index]
        return np.array([[p, c.conjugate()], [c, 1.0 - p]], dtype=complex)


def _drift_rows(p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Rows of the Liouvillian acting on (p, c, conj c, 1-p)."""
    m = build_liouvillian_2lvl(p).matrix
    return m[0], m[1]


def _state_components(rho0: np.ndarray) -> tuple[float, complex]:
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (2, 2):
        raise ValueError("rho0 must be 2x2")
    if abs(np.trace(rho0) - 1.0) > 1e-12 or abs(rho0[0, 1] - rho0[1, 0].conjugate()) > 1e-12:
        raise ValueError("rho0 must be a unit-trace Hermitian matrix")
    return float(rho0[0, 0].real), complex(rho0[1, 0])


def _min_eig(pop, coh):
    # Smallest eigenvalue of [[p, conj c], [c, 1-p]].
    return 0.5 - np.sqrt((pop - 0.5) ** 2 + np.abs(coh) ** 2)


def simulate_trajectory(p: ModelParams, rho0: np.ndarray,
                        cfg: TrajectoryConfig,
                        seed: int | None = None) -> TrajectoryResult:
    """One Euler-Maruyama path of the conditioned state.

    Trace and Hermiticity hold exactly at every step (representation
    guarantees); the diagonal never feels the noise directly.
    """
    require_valid(p)
    cfg.check_stability(p)
    row_p, row_c = _drift_rows(p)
    pop, coh = _state_components(rho0)
    noise_amp = math.sqrt(p.y)
    sqrt_dt = math.sqrt(cfg.dt)
    rng = np.random.Generator(np.random.Philox(key=cfg.seed if seed is None
                                               else seed))
    dws = rng.standard_normal(cfg.n_steps) * sqrt_dt
    floor = -10.0 * cfg.dt

    out = np.empty((cfg.n_steps + 1, 2, 2), dtype=complex)

    def store(k, pop, coh):
        out[k, 0, 0] = pop
        out[k, 1, 0] = coh
        out[k, 0, 1] = coh.conjugate()
        out[k, 1, 1] = 1.0 - pop

    store(0, pop, coh)
    for k in range(cfg.n_steps):
        state = (pop, coh, coh.conjugate(), 1.0 - pop)
        dpop = sum(r * s for r, s in zip(row_p, state)).real
        dcoh = sum(r * s for r, s in zip(row_c, state))
        pop = pop + dpop * cfg.dt
        coh = coh + dcoh * cfg.dt - 1j * noise_amp * coh * dws[k]
        if _min_eig(pop, coh) < floor:
            raise StepInstabilityError(
                f"eigenvalue below {floor:.2e} at step {k + 1}; reduce dt")
        store(k + 1, pop, coh)
    return TrajectoryResult(times=cfg.times, rhos=out)


def ensemble_mean(p: ModelParams, rho0: np.ndarray,
                  cfg: TrajectoryConfig) -> EnsembleResult:
    """Sample mean and standard errors over n_traj independent paths.

    Trajectory k draws from the Philox stream keyed by seed + k; batches
    are accumulated in a fixed order, so results are deterministic.
    """
    require_valid(p)
    cfg.check_stability(p)
    if cfg.n_traj < 2:
        raise ValueError("ensemble statistics need n_traj >= 2")
    row_p, row_c = _drift_rows(p)
    pop0, coh0 = _state_components(rho0)
    noise_amp = math.sqrt(p.y)
    sqrt_dt = math.sqrt(cfg.dt)
    floor = -10.0 * cfg.dt
    n_t = cfg.n_steps + 1

    sum_pop = np.zeros(n_t)
    sum_pop2 = np.zeros(n_t)
    sum_coh = np.zeros(n_t, dtype=complex)
    sum_coh_re2 = np.zeros(n_t)
    sum_coh_im2 = np.zeros(n_t)

    for start in range(0, cfg.n_traj, _BATCH):
        count = min(_BATCH, cfg.n_traj - start)
        dws = np.empty((count, cfg.n_steps))
        for k in range(count):
            rng = np.random.Generator(np.random.Philox(key=cfg.seed + start + k))
            dws[k] = rng.standard_normal(cfg.n_steps)
        dws *= sqrt_dt

        pop = np.full(count, pop0)
        coh = np.full(count, coh0, dtype=complex)

        def accumulate(step, pop, coh):
            sum_pop[step] += pop.sum()
            sum_pop2[step] += (pop * pop).sum()
            sum_coh[step] += coh.sum()
            sum_coh_re2[step] += (coh.real ** 2).sum()
            sum_coh_im2[step] += (coh.imag ** 2).sum()

        accumulate(0, pop, coh)
        for k in range(cfg.n_steps):
            ccon = coh.conjugate()
            comp = 1.0 - pop
            dpop = (row_p[0] * pop + row_p[1] * coh
                    + row_p[2] * ccon + row_p[3] * comp).real
            dcoh = (row_c[0] * pop + row_c[1] * coh
                    + row_c[2] * ccon + row_c[3] * comp)
            pop = pop + dpop * cfg.dt
            coh = coh + dcoh * cfg.dt - 1j * noise_amp * coh * dws[:, k]
            worst = _min_eig(pop, coh).min()
            if worst < floor:
                raise StepInstabilityError(
                    f"eigenvalue {worst:.3e} below {floor:.2e} at step "
                    f"{k + 1}; reduce dt")
            accumulate(k + 1, pop, coh)

    n = cfg.n_traj
    mean_pop = sum_pop / n
    mean_coh = sum_coh / n
    # Unbiased sample variance; max(..., 0) guards rounding at y = 0.
    scale = 1.0 / (n - 1)
    var_pop = np.maximum(scale * (sum_pop2 - n * mean_pop ** 2), 0.0)
    var_re = np.maximum(scale * (sum_coh_re2 - n * mean_coh.real ** 2), 0.0)
    var_im = np.maximum(scale * (sum_coh_im2 - n * mean_coh.imag ** 2), 0.0)
    return EnsembleResult(times=cfg.times, mean_pop=mean_pop,
                          mean_coh=mean_coh,
                          se_pop=np.sqrt(var_pop / n),
                          se_coh_re=np.sqrt(var_re / n),
                          se_coh_im=np.sqrt(var_im / n),
                          n_traj=n)
