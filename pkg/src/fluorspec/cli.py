"""Command-line interface.

Commands: spectrum, angular, figures, strength, sme, validate.  Outputs
are CSV files (12 significant digits, LF endings) with a flat key/value
manifest next to each, so any run can be reproduced byte for byte from
its manifest.  Exit codes: 0 ok, 1 validation-suite failure, 2 bad input,
3 numerical failure.
"""

from __future__ import annotations

import math
import sys
from importlib import metadata
from pathlib import Path

import click
import numpy as np

from . import angular as angular_mod
from . import checks, figures, sme, spectrum, superop
from .linalg import (MaxSubdivisionsError, NoConvergenceError,
                     SingularMatrixError)
from .model import (DegenerateSteadyStateError, InvalidParamsError,
                    ModelParams, ParamFileError, params_to_mapping,
                    read_param_file, require_valid)
from .multilevel import NonConvergenceError
from .output import RunManifest, write_csv

EXIT_SUITE_FAILURE = 1
EXIT_BAD_INPUT = 2
EXIT_NUMERICAL = 3

_INPUT_ERRORS = (ParamFileError, InvalidParamsError, ValueError)
_NUMERICAL_ERRORS = (SingularMatrixError, NoConvergenceError,
                     MaxSubdivisionsError, DegenerateSteadyStateError,
                     NonConvergenceError, superop.NonUniqueSteadyStateError,
                     sme.StepInstabilityError, OverflowError,
                     ArithmeticError, np.linalg.LinAlgError)


def _version() -> str:
    try:
        return metadata.version("fluorspec")
    except metadata.PackageNotFoundError:
        return "0.0.0"


def _load_params(path: str) -> ModelParams:
    p = read_param_file(path)
    require_valid(p)
    return p


def _outdir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


class _Failure(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def _guard(fn, *args, **kwargs):
    """Map library exceptions onto the documented exit codes."""
    try:
        return fn(*args, **kwargs)
    except _NUMERICAL_ERRORS as exc:
        raise _Failure(f"numerical failure: {exc}", EXIT_NUMERICAL) from exc
    except _INPUT_ERRORS as exc:
        raise _Failure(f"bad input: {exc}", EXIT_BAD_INPUT) from exc


@click.group()
@click.version_option(version=_version(), prog_name="fluorspec")
def main() -> None:
    """Fluorescence spectra of a driven two-level atom with
    direct-scattering corrections."""


grid_options = [
    click.option("--xmin", type=float, default=-15.0, show_default=True),
    click.option("--xmax", type=float, default=15.0, show_default=True),
    click.option("--points", type=int, default=1001, show_default=True),
]


def _with(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


@main.command("spectrum")
@click.option("--params", "params_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@_with(grid_options)
@click.option("--method", type=click.Choice(["closed", "oracle"]),
              default="closed", show_default=True)
@click.option("--model", type=click.Choice(["modified", "usual"]),
              default="modified", show_default=True,
              help="'usual' zeroes the direct-scattering parameters.")
@click.option("--out", default="./out", show_default=True)
def spectrum_cmd(params_path, xmin, xmax, points, method, model, out):
    """Total spectrum on a frequency grid -> spectrum.csv."""
    def run():
        p = _load_params(params_path)
        if model == "usual":
            p = p.without_corrections()
        xs = figures.symmetric_grid(xmin, xmax, points)
        curve = figures.compute_curve(p, xs, method=method)
        outdir = _outdir(out)
        csv_path = outdir / "spectrum.csv"
        write_csv(csv_path, ["x", "sigma"], zip(curve.xs, curve.values))
        manifest = RunManifest(command="spectrum", version=_version())
        manifest.set_params(params_to_mapping(p))
        manifest.set("grid.xmin", xmin)
        manifest.set("grid.xmax", xmax)
        manifest.set("grid.points", points)
        manifest.set("method", method)
        manifest.set("model", model)
        manifest.add_output(csv_path)
        manifest.write(outdir / "spectrum.manifest")
        click.echo(f"wrote {csv_path}")
    _guard(run)


@main.command("figures")
@click.argument("figure", type=click.IntRange(1, 4))
@click.option("--points", type=int, default=1001, show_default=True)
@click.option("--out", default="./out", show_default=True)
def figures_cmd(figure, points, out):
    """Reference dataset for one figure (hardwired parameters)."""
    def run():
        written = figures.write_figure_datasets(figure, _outdir(out),
                                                _version(), points=points)
        for path in written:
            click.echo(f"wrote {path}")
    _guard(run)


@main.command("angular")
@click.option("--params", "params_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@_with(grid_options)
@click.option("--theta-points", type=int, default=7, show_default=True,
              help="Polar angles j*pi/T for j = 1..T.")
@click.option("--family", default=angular_mod.DEFAULT_FAMILY,
              show_default=True,
              type=click.Choice(sorted(angular_mod.PROFILE_FAMILIES)))
@click.option("--out", default="./out", show_default=True)
def angular_cmd(params_path, xmin, xmax, points, theta_points, family, out):
    """Direction/polarization-resolved spectra -> angular.csv."""
    def run():
        p = _load_params(params_path)
        profiles = angular_mod.build_profiles(p, family)
        xs = figures.symmetric_grid(xmin, xmax, points)
        thetas = [j * math.pi / theta_points
                  for j in range(1, theta_points + 1)]
        rows = []
        for theta in thetas:
            for x in xs:
                solver = superop.ChannelSolver(p, float(x))
                plus = solver.spectrum(
                    angular_mod._channel_operator(p, profiles, theta, +1))
                minus = solver.spectrum(
                    angular_mod._channel_operator(p, profiles, theta, -1))
                rows.append((theta, x, plus, minus))
        outdir = _outdir(out)
        csv_path = outdir / "angular.csv"
        write_csv(csv_path, ["theta", "x", "sigma_plus", "sigma_minus"], rows)
        manifest = RunManifest(command="angular", version=_version())
        manifest.set_params(params_to_mapping(p))
        manifest.set("grid.xmin", xmin)
        manifest.set("grid.xmax", xmax)
        manifest.set("grid.points", points)
        manifest.set("grid.theta_points", theta_points)
        manifest.set("profile_family", family)
        manifest.add_output(csv_path)
        manifest.write(outdir / "angular.manifest")
        click.echo(f"wrote {csv_path}")
    _guard(run)


@main.command("strength")
@click.option("--params", "params_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--check-quadrature", is_flag=True,
              help="Also integrate the spectrum over [-500, 500].")
@click.option("--out", default="./out", show_default=True)
def strength_cmd(params_path, check_quadrature, out):
    """Integrated spectrum strength (closed form) -> strength.csv."""
    def run():
        p = _load_params(params_path)
        closed = spectrum.strength(p)
        header = ["strength"]
        row = [closed]
        if check_quadrature:
            from .linalg import integrate_adaptive
            quad = integrate_adaptive(lambda x: spectrum.sigma_total(p, x),
                                      -500.0, 500.0, 1e-6)
            header.append("strength_quadrature")
            row.append(quad)
            click.echo(f"strength = {closed!r} (quadrature {quad!r})")
        else:
            click.echo(f"strength = {closed!r}")
        outdir = _outdir(out)
        csv_path = outdir / "strength.csv"
        write_csv(csv_path, header, [row])
        manifest = RunManifest(command="strength", version=_version())
        manifest.set_params(params_to_mapping(p))
        manifest.set("check_quadrature", check_quadrature)
        manifest.add_output(csv_path)
        manifest.write(outdir / "strength.manifest")
    _guard(run)


_RHO0 = {
    "ground": np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex),
    "excited": np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex),
    "mixed": np.array([[0.5, 0.0], [0.0, 0.5]], dtype=complex),
    "superposition": np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex),
}


@main.command("sme")
@click.option("--params", "params_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--dt", type=float, default=1e-3, show_default=True)
@click.option("--steps", type=int, default=5000, show_default=True)
@click.option("--traj", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=20260810, show_default=True)
@click.option("--rho0", type=click.Choice(sorted(_RHO0)), default="ground",
              show_default=True)
@click.option("--out", default="./out", show_default=True)
def sme_cmd(params_path, dt, steps, traj, seed, rho0, out):
    """Stochastic trajectories: one path (--traj 1) or ensemble summary."""
    def run():
        p = _load_params(params_path)
        cfg = sme.TrajectoryConfig(dt=dt, n_steps=steps, seed=seed,
                                   n_traj=traj)
        outdir = _outdir(out)
        manifest = RunManifest(command="sme", version=_version())
        manifest.set_params(params_to_mapping(p))
        for key, value in (("dt", dt), ("steps", steps), ("traj", traj),
                           ("seed", seed), ("rho0", rho0)):
            manifest.set(key, value)
        entry_cols = ["rho00_re", "rho00_im", "rho10_re", "rho10_im",
                      "rho01_re", "rho01_im", "rho11_re", "rho11_im"]
        if traj == 1:
            result = sme.simulate_trajectory(p, _RHO0[rho0], cfg)
            rows = []
            for k, t in enumerate(result.times):
                r = result.rhos[k]
                rows.append((t, r[0, 0].real, r[0, 0].imag, r[1, 0].real,
                             r[1, 0].imag, r[0, 1].real, r[0, 1].imag,
                             r[1, 1].real, r[1, 1].imag))
            csv_path = outdir / "trajectory.csv"
            write_csv(csv_path, ["t"] + entry_cols, rows)
        else:
            ens = sme.ensemble_mean(p, _RHO0[rho0], cfg)
            rows = []
            for k, t in enumerate(ens.times):
                pop = ens.mean_pop[k]
                coh = ens.mean_coh[k]
                rows.append((t, pop, 0.0, coh.real, coh.imag, coh.real,
                             -coh.imag, 1.0 - pop, 0.0, ens.se_pop[k],
                             ens.se_coh_re[k], ens.se_coh_im[k]))
            csv_path = outdir / "ensemble.csv"
            write_csv(csv_path, ["t"] + entry_cols
                      + ["se_pop", "se_coh_re", "se_coh_im"], rows)
        manifest.add_output(csv_path)
        manifest.write(outdir / "sme.manifest")
        click.echo(f"wrote {csv_path}")
    _guard(run)


@main.command("validate")
@click.option("--fast", is_flag=True, help="Reduced draw counts.")
@click.option("--mutate", type=click.Choice(spectrum.MUTATION_TARGETS),
              default=None,
              help="Deliberately tamper with one spectral coefficient; the "
                   "suite must then fail (sensitivity demonstration).")
@click.option("--out", default="./out", show_default=True)
@click.pass_context
def validate_cmd(ctx, fast, mutate, out):
    """Run the cross-module validation suite; exit 0 iff all checks pass."""
    def run():
        return checks.run_suite(fast=fast, mutate=mutate, progress=click.echo)
    results = _guard(run)
    outdir = _outdir(out)
    human = [r.line() for r in results]
    failed = [r for r in results if not r.passed]
    summary = (f"{len(results) - len(failed)}/{len(results)} checks passed"
               + (f" ({len(failed)} FAILED)" if failed else ""))
    human.append(summary)
    (outdir / "validate_report.txt").write_text("\n".join(human) + "\n",
                                                encoding="utf-8", newline="\n")
    kv_lines = [f"suite.passed = {not failed}",
                f"suite.mutation = {mutate or 'none'}",
                f"suite.fast = {fast}"]
    for r in results:
        kv_lines.append(f"check.{r.name}.passed = {r.passed}")
        kv_lines.append(f"check.{r.name}.value = {r.value!r}")
        kv_lines.append(f"check.{r.name}.limit = {r.limit!r}")
        for key, value in r.extras:
            kv_lines.append(f"check.{r.name}.{key} = {value}")
    (outdir / "validate_report.kv").write_text("\n".join(kv_lines) + "\n",
                                               encoding="utf-8", newline="\n")
    click.echo(summary)
    if failed:
        ctx.exit(EXIT_SUITE_FAILURE)


if __name__ == "__main__":
    main()
