"""Reference figure datasets: hardwired parameter sets and CSV emission.

The four dataset families compare the absorption/emission-only model
("usual") with the model including the direct-scattering channel
("modified") at gamma = 0.6:

  1:  omega2 = 28, z =  0.0, bandwidths y in {0, 0.5, 1, 4}
  2:  omega2 = 28, z =  2.5, same bandwidths
  3:  omega2 = 28, z = -2.5, same bandwidths
  4:  y = 50, omega2 in {20, 40}, z in {+-2.5}  (wide-bandwidth regime)

The modified-model correction parameters are fixed here and not
configurable — these datasets are the package's reference ground truth;
free exploration goes through the ``spectrum`` command.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import superop
from .model import ModelParams
from .output import RunManifest, write_csv
from .spectrum import SpectrumCurve, sigma_total_grid

__all__ = [
    "USUAL_BASE", "MODIFIED_BASE", "FIGURE_IDS", "figure_cases",
    "symmetric_grid", "compute_curve", "write_figure_datasets", "FigureCase",
]

GAMMA = 0.6
BANDWIDTHS = (0.0, 0.5, 1.0, 4.0)
DETUNINGS = {1: 0.0, 2: 2.5, 3: -2.5}
FIGURE_IDS = (1, 2, 3, 4)

USUAL_BASE = ModelParams(gamma=GAMMA, omega2=28.0, z=0.0, y=0.0)
MODIFIED_BASE = replace(
    USUAL_BASE,
    delta_plus=-0.03, delta_minus=0.13,
    g_plus_norm2=0.0045, g_minus_norm2=0.0055,
    g_inner=complex(-0.004, 0.002), epsilon=-0.001,
)


@dataclass(frozen=True)
class FigureCase:
    """One curve of a figure dataset."""

    figure: int
    label: str        # grouping key for panels (bandwidth or drive/detuning)
    model: str        # "usual" | "modified"
    params: ModelParams
    filename: str


def _num(value: float) -> str:
    text = f"{value:g}"
    return text


def figure_cases(figure: int) -> list[FigureCase]:
    if figure not in FIGURE_IDS:
        raise ValueError(f"figure must be one of {FIGURE_IDS}, got {figure}")
    cases = []
    if figure in (1, 2, 3):
        z = DETUNINGS[figure]
        for y in BANDWIDTHS:
            for model, base in (("usual", USUAL_BASE),
                                ("modified", MODIFIED_BASE)):
                p = replace(base, z=z, y=y)
                cases.append(FigureCase(
                    figure=figure, label=f"y={_num(y)}", model=model,
                    params=p,
                    filename=f"fig{figure}_y{_num(y)}_{model}.csv"))
    else:
        for omega2 in (20.0, 40.0):
            for z in (2.5, -2.5):
                for model, base in (("usual", USUAL_BASE),
                                    ("modified", MODIFIED_BASE)):
                    p = replace(base, omega2=omega2, z=z, y=50.0)
                    cases.append(FigureCase(
                        figure=4, label=f"O{_num(omega2)} z={_num(z)}",
                        model=model, params=p,
                        filename=f"fig4_O{_num(omega2)}_z{_num(z)}_{model}.csv"))
    return cases


def symmetric_grid(xmin: float, xmax: float, points: int) -> np.ndarray:
    """Strictly increasing grid; antisymmetrized when xmin == -xmax so the
    reflection x -> -x maps grid points onto each other exactly."""
    if points < 1:
        raise ValueError("points must be >= 1")
    if points == 1:
        return np.array([0.5 * (xmin + xmax)])
    xs = np.linspace(xmin, xmax, points)
    if xmin == -xmax:
        xs = 0.5 * (xs - xs[::-1])
    return xs


def compute_curve(p: ModelParams, xs: np.ndarray,
                  method: str = "closed") -> SpectrumCurve:
    xs = np.asarray(xs, dtype=float)
    if xs.size > 1 and not np.all(np.diff(xs) > 0):
        raise ValueError("frequency grid must be strictly increasing")
    if method == "closed":
        values = sigma_total_grid(p, xs)
    elif method == "oracle":
        values = superop.sigma_oracle_grid(p, xs)
    else:
        raise ValueError(f"method must be 'closed' or 'oracle', got {method!r}")
    return SpectrumCurve(xs=np.asarray(xs, dtype=float), values=values,
                         params=p, method=method)


def write_figure_datasets(figure: int, outdir: Path, version: str,
                          xmin: float = -15.0, xmax: float = 15.0,
                          points: int = 1001) -> list[Path]:
    """Emit one CSV per (curve, model) pair plus the run manifest."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    xs = symmetric_grid(xmin, xmax, points)
    manifest = RunManifest(command=f"figures {figure}", version=version)
    manifest.set("grid.xmin", xmin)
    manifest.set("grid.xmax", xmax)
    manifest.set("grid.points", points)
    manifest.set("method", "closed")
    written = []
    for case in figure_cases(figure):
        curve = compute_curve(case.params, xs)
        path = outdir / case.filename
        write_csv(path, ["x", "sigma"], zip(curve.xs, curve.values))
        manifest.add_output(path)
        written.append(path)
    manifest_path = outdir / f"fig{figure}.manifest"
    manifest.write(manifest_path)
    written.append(manifest_path)
    return written
