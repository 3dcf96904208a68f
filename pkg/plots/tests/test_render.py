"""Renderer tests; datasets come from the producing CLI (its external
interface), so this package never imports the physics library."""

import subprocess
import sys

import numpy as np
import pytest

from fluorspec_plots import (MissingDatasetError, build_figure,
                             figure_layout, load_curve, render)
from fluorspec_plots.cli import main as cli_main
from fluorspec_plots.layout import STYLE


@pytest.fixture(scope="session")
def datasets(tmp_path_factory):
    root = tmp_path_factory.mktemp("datasets")
    for figure in (1, 2, 3, 4):
        out = root / f"fig{figure}"
        subprocess.run(
            [sys.executable, "-m", "fluorspec", "figures", str(figure),
             "--points", "201", "--out", str(out)],
            check=True, capture_output=True)
    return root


@pytest.mark.parametrize("figure", [1, 2, 3, 4])
def test_layout_inventory(figure):
    layout = figure_layout(figure)
    assert len(layout.panels) == 4
    for panel in layout.panels:
        assert [c.model for c in panel.curves] == ["modified", "usual"]
    assert (layout.xlim is None) == (figure == 4)


@pytest.mark.parametrize("figure", [1, 2, 3, 4])
def test_render_all_figures(datasets, figure, tmp_path):
    out = render(datasets / f"fig{figure}", figure)
    assert out.name == f"fig{figure}.png"
    assert out.stat().st_size > 0


@pytest.mark.parametrize("figure", [1, 4])
def test_panels_and_styles(datasets, figure):
    fig, layout = build_figure(datasets / f"fig{figure}", figure)
    try:
        axes = fig.axes
        assert len(axes) == 4
        for ax, panel in zip(axes, layout.panels):
            lines = ax.get_lines()
            assert len(lines) == 2
            for line, curve in zip(lines, panel.curves):
                assert line.get_linestyle() == STYLE[curve.model]
            assert ax.get_xlabel() == "x"
            assert ax.get_ylabel() == "Σ(x)"
    finally:
        import matplotlib.pyplot as plt
        plt.close(fig)


def test_plotted_values_verbatim(datasets):
    fig, layout = build_figure(datasets / "fig1", 1)
    try:
        line = fig.axes[0].get_lines()[0]
        curve = layout.panels[0].curves[0]
        data = load_curve(datasets / "fig1" / curve.filename)
        assert np.array_equal(line.get_xydata(), data)
    finally:
        import matplotlib.pyplot as plt
        plt.close(fig)


def test_missing_dataset(tmp_path):
    with pytest.raises(MissingDatasetError) as info:
        render(tmp_path, 1)
    assert "fig1_y0_modified.csv" in str(info.value)


def test_bad_header_rejected(tmp_path):
    bad = tmp_path / "fig1_y0_modified.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        load_curve(bad)


def test_rerender_deterministic(datasets):
    import matplotlib.pyplot as plt
    shapes = []
    for _ in range(2):
        fig, _ = build_figure(datasets / "fig2", 2)
        shapes.append((tuple(fig.get_size_inches()),
                       tuple(len(line.get_xdata())
                             for ax in fig.axes for line in ax.get_lines())))
        plt.close(fig)
    assert shapes[0] == shapes[1]
    assert shapes[0][1] == (201,) * 8


def test_svg_format(datasets):
    out = render(datasets / "fig3", 3, fmt="svg")
    assert out.suffix == ".svg" and out.stat().st_size > 0
    with pytest.raises(ValueError):
        render(datasets / "fig3", 3, fmt="pdf")


def test_cli_roundtrip(datasets, capsys):
    code = cli_main([str(datasets / "fig1"), "1", "--format", "png",
                     "--dpi", "72"])
    assert code == 0
    assert "wrote" in capsys.readouterr().out


def test_cli_missing_dataset(tmp_path, capsys):
    code = cli_main([str(tmp_path), "2"])
    assert code == 2
    assert "missing dataset" in capsys.readouterr().err
