"""Render figure datasets to multi-panel images.

A thin consumer: every plotted value is read verbatim from the dataset
CSVs (enforced by checksum comparison after plotting); all physics lives
in the package that produced the files.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .layout import FigureLayout, MissingDatasetError, figure_layout  # noqa: E402

EXPECTED_HEADER = "x,sigma"


def load_curve(path: Path) -> np.ndarray:
    if not path.exists():
        raise MissingDatasetError(str(path))
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().strip()
        if header != EXPECTED_HEADER:
            raise ValueError(f"{path.name}: expected header "
                             f"{EXPECTED_HEADER!r}, got {header!r}")
        return np.loadtxt(handle, delimiter=",", ndmin=2)


def _checksum(array: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(array,
                                               dtype=float).tobytes()).hexdigest()


def build_figure(dataset_dir: Path, figure: int):
    """Assemble the matplotlib figure; returns (fig, layout).

    Raises :class:`MissingDatasetError` if any referenced CSV is absent,
    and refuses to ship a figure whose plotted arrays differ from the
    parsed files (no-numerics guarantee).
    """
    dataset_dir = Path(dataset_dir)
    layout = figure_layout(figure)
    n_panels = len(layout.panels)
    fig, axes = plt.subplots(2, n_panels // 2, figsize=(9.0, 6.5),
                             sharex=layout.xlim is not None)
    for panel, ax in zip(layout.panels, axes.ravel()):
        for curve in panel.curves:
            data = load_curve(dataset_dir / curve.filename)
            line, = ax.plot(data[:, 0], data[:, 1],
                            linestyle=curve.linestyle, color="black",
                            linewidth=1.0, label=curve.model)
            plotted = line.get_xydata()
            if _checksum(plotted) != _checksum(data[:, :2]):
                raise AssertionError(
                    f"{curve.filename}: plotted data differs from the file")
        ax.set_title(panel.title, fontsize=10)
        ax.set_xlabel("x")
        ax.set_ylabel("Σ(x)")
        if layout.xlim is not None:
            ax.set_xlim(*layout.xlim)
        ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    return fig, layout


def render(dataset_dir, figure: int, fmt: str = "png",
           dpi: int = 150) -> Path:
    """Render one figure; returns the written image path."""
    if fmt not in ("png", "svg"):
        raise ValueError(f"format must be png or svg, got {fmt!r}")
    dataset_dir = Path(dataset_dir)
    fig, _ = build_figure(dataset_dir, figure)
    out = dataset_dir / f"fig{figure}.{fmt}"
    try:
        fig.savefig(out, dpi=dpi)
    finally:
        plt.close(fig)
    return out
