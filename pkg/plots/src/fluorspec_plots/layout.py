"""Panel layouts for the four reference figure datasets.

Figures 1-3 show one panel per laser bandwidth at a fixed detuning;
figure 4 one panel per (drive strength, detuning) pair in the
wide-bandwidth regime.  Each panel overlays the modified model (solid)
on the usual absorption/emission-only model (dashed).  Axis ranges:
figures 1-3 use the dataset's x in [-15, 15]; figure 4 autoscales —
recorded here so the choice travels with the layout.
"""

from __future__ import annotations

from dataclasses import dataclass

FIGURE_IDS = (1, 2, 3, 4)

STYLE = {"modified": "-", "usual": "--"}


class MissingDatasetError(FileNotFoundError):
    """A CSV referenced by the layout is absent from the dataset dir."""


@dataclass(frozen=True)
class Curve:
    filename: str
    model: str  # "usual" | "modified"

    @property
    def linestyle(self) -> str:
        return STYLE[self.model]


@dataclass(frozen=True)
class Panel:
    title: str
    curves: tuple[Curve, ...]


@dataclass(frozen=True)
class FigureLayout:
    figure: int
    panels: tuple[Panel, ...]
    xlim: tuple[float, float] | None  # None = autoscale


def _num(value: float) -> str:
    return f"{value:g}"


def figure_layout(figure: int) -> FigureLayout:
    if figure not in FIGURE_IDS:
        raise ValueError(f"figure must be one of {FIGURE_IDS}, got {figure}")
    panels = []
    if figure in (1, 2, 3):
        for y in (0.0, 0.5, 1.0, 4.0):
            curves = tuple(
                Curve(filename=f"fig{figure}_y{_num(y)}_{model}.csv",
                      model=model)
                for model in ("modified", "usual"))
            panels.append(Panel(title=f"y = {_num(y)}", curves=curves))
        xlim = (-15.0, 15.0)
    else:
        for omega2 in (20.0, 40.0):
            for z in (2.5, -2.5):
                curves = tuple(
                    Curve(filename=(f"fig4_O{_num(omega2)}_z{_num(z)}_"
                                    f"{model}.csv"),
                          model=model)
                    for model in ("modified", "usual"))
                panels.append(Panel(
                    title=f"Ω² = {_num(omega2)}, z = {_num(z)}",
                    curves=curves))
        xlim = None
    return FigureLayout(figure=figure, panels=tuple(panels), xlim=xlim)
