import numpy as np
import pytest
from click.testing import CliRunner

from fluorspec.cli import (EXIT_BAD_INPUT, EXIT_NUMERICAL, _Failure, _guard,
                           main)
from fluorspec.linalg import SingularMatrixError
from fluorspec.model import params_to_mapping
from fluorspec.output import format_sig12

from conftest import MODIFIED


@pytest.fixture
def params_file(tmp_path):
    path = tmp_path / "model.params"
    lines = [f"{k} = {v}" for k, v in params_to_mapping(MODIFIED).items()]
    path.write_text("\n".join(lines) + "\n")
    return path


def _run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def _load(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_spectrum_csv(tmp_path, params_file):
    out = tmp_path / "out"
    result = _run("spectrum", "--params", params_file, "--out", out)
    assert result.exit_code == 0, result.output
    text = (out / "spectrum.csv").read_text()
    lines = text.splitlines()
    assert lines[0] == "x,sigma"
    assert len(lines) == 1002
    assert "\r" not in text
    # every value is 12-significant-digit scientific notation
    token = lines[1].split(",")[1]
    assert token == format_sig12(float(token))
    manifest = (out / "spectrum.manifest").read_text()
    assert "method = closed" in manifest
    assert "outputs = spectrum.csv" in manifest


def test_spectrum_single_point(tmp_path, params_file):
    out = tmp_path / "out"
    result = _run("spectrum", "--params", params_file, "--points", 1,
                  "--xmin", 0, "--xmax", 0, "--out", out)
    assert result.exit_code == 0
    data = _load(out / "spectrum.csv")
    assert data.shape == (1, 2)
    assert data[0, 0] == 0.0


def test_spectrum_usual_model_symmetric(tmp_path, params_file):
    out = tmp_path / "out"
    result = _run("spectrum", "--params", params_file, "--model", "usual",
                  "--out", out)
    assert result.exit_code == 0
    data = _load(out / "spectrum.csv")
    assert np.max(np.abs(data[:, 1] - data[::-1, 1])) <= 1e-12


def test_spectrum_methods_agree(tmp_path, params_file):
    closed = tmp_path / "closed"
    oracle = tmp_path / "oracle"
    assert _run("spectrum", "--params", params_file, "--out",
                closed).exit_code == 0
    assert _run("spectrum", "--params", params_file, "--method", "oracle",
                "--out", oracle).exit_code == 0
    a = _load(closed / "spectrum.csv")
    b = _load(oracle / "spectrum.csv")
    assert np.max(np.abs(a[:, 1] - b[:, 1])) <= 1e-10 * np.max(a[:, 1])


def test_spectrum_rerun_bit_identical(tmp_path, params_file):
    first = tmp_path / "a"
    second = tmp_path / "b"
    for out in (first, second):
        assert _run("spectrum", "--params", params_file, "--out",
                    out).exit_code == 0
    assert (first / "spectrum.csv").read_bytes() \
        == (second / "spectrum.csv").read_bytes()
    assert (first / "spectrum.manifest").read_bytes() \
        == (second / "spectrum.manifest").read_bytes()


def test_csv_roundtrip_stability(tmp_path, params_file):
    out = tmp_path / "out"
    assert _run("spectrum", "--params", params_file, "--points", 101,
                "--out", out).exit_code == 0
    for line in (out / "spectrum.csv").read_text().splitlines()[1:]:
        for token in line.split(","):
            assert format_sig12(float(token)) == token


@pytest.mark.parametrize("figure, count", [(1, 8), (2, 8), (3, 8), (4, 8)])
def test_figures_inventory(tmp_path, figure, count):
    out = tmp_path / f"fig{figure}"
    result = _run("figures", figure, "--points", 101, "--out", out)
    assert result.exit_code == 0
    csvs = sorted(p.name for p in out.glob("*.csv"))
    assert len(csvs) == count
    assert (out / f"fig{figure}.manifest").exists()
    if figure == 4:
        assert "fig4_O20_z-2.5_modified.csv" in csvs
        assert "fig4_O40_z2.5_usual.csv" in csvs
    else:
        assert f"fig{figure}_y0.5_usual.csv" in csvs


def test_figures_resonant_triplet(tmp_path):
    out = tmp_path / "fig1"
    assert _run("figures", 1, "--out", out).exit_code == 0
    data = _load(out / "fig1_y0_usual.csv")
    values = data[:, 1]
    assert np.max(np.abs(values - values[::-1])) <= 1e-12
    maxima = [i for i in range(1, len(values) - 1)
              if values[i - 1] < values[i] > values[i + 1]]
    assert len(maxima) == 3


def test_angular_csv(tmp_path, params_file):
    out = tmp_path / "out"
    result = _run("angular", "--params", params_file, "--points", 5,
                  "--theta-points", 3, "--out", out)
    assert result.exit_code == 0
    text = (out / "angular.csv").read_text().splitlines()
    assert text[0] == "theta,x,sigma_plus,sigma_minus"
    assert len(text) == 1 + 3 * 5
    data = _load(out / "angular.csv")
    assert np.all(data[:, 0] > 0.0) and np.all(data[:, 0] <= np.pi + 1e-12)
    assert np.all(data[:, 2:] >= -1e-10)


def test_strength_command(tmp_path, params_file):
    out = tmp_path / "out"
    result = _run("strength", "--params", params_file, "--out", out)
    assert result.exit_code == 0
    data = _load(out / "strength.csv")
    assert data.shape == (1, 1)
    assert "strength =" in result.output


def test_sme_trajectory_csv(tmp_path, params_file):
    out = tmp_path / "out"
    result = _run("sme", "--params", params_file, "--steps", 200, "--traj",
                  1, "--seed", 7, "--out", out)
    assert result.exit_code == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == ("t,rho00_re,rho00_im,rho10_re,rho10_im,"
                        "rho01_re,rho01_im,rho11_re,rho11_im")
    assert len(lines) == 202
    assert "seed = 7" in (out / "sme.manifest").read_text()


def test_sme_ensemble_csv(tmp_path, params_file):
    out = tmp_path / "out"
    result = _run("sme", "--params", params_file, "--steps", 100, "--traj",
                  8, "--out", out)
    assert result.exit_code == 0
    header = (out / "ensemble.csv").read_text().splitlines()[0]
    assert header.endswith("se_pop,se_coh_re,se_coh_im")


def test_bad_param_file_exits_2(tmp_path):
    bad = tmp_path / "bad.params"
    bad.write_text("gamma = 0.6\n")
    result = _run("spectrum", "--params", bad, "--out", tmp_path / "o")
    assert result.exit_code == EXIT_BAD_INPUT
    assert "missing keys" in result.output


def test_invalid_params_exit_2(tmp_path):
    bad = tmp_path / "bad.params"
    mapping = params_to_mapping(MODIFIED)
    mapping["g_inner_re"] = 1.0  # violates the norm bound
    bad.write_text("\n".join(f"{k} = {v}" for k, v in mapping.items()))
    result = _run("spectrum", "--params", bad, "--out", tmp_path / "o")
    assert result.exit_code == EXIT_BAD_INPUT
    assert "cauchy-schwarz" in result.output


def test_numerical_failures_map_to_exit_3():
    def boom():
        raise SingularMatrixError("resolvent at a pole")
    with pytest.raises(_Failure) as info:
        _guard(boom)
    assert info.value.exit_code == EXIT_NUMERICAL


def test_validate_fast_passes(tmp_path):
    result = _run("validate", "--fast", "--out", tmp_path)
    assert result.exit_code == 0, result.output
    report = (tmp_path / "validate_report.kv").read_text()
    assert "suite.passed = True" in report
    assert "check.spectrum.oracle-equivalence.fig1-usual-y=0 =" in report


def test_validate_mutation_fails(tmp_path):
    result = _run("validate", "--fast", "--mutate", "usual-term", "--out",
                  tmp_path)
    assert result.exit_code == 1
    assert "FAIL" in result.output


def test_core_package_has_no_plotting_dependency():
    # The renderer is a separate component; the core suite must run
    # without it (and without matplotlib).
    import sys
    import fluorspec  # noqa: F401
    assert "matplotlib" not in sys.modules
    assert "fluorspec_plots" not in sys.modules
