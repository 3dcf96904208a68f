from .layout import FigureLayout, MissingDatasetError, figure_layout
from .render import build_figure, load_curve, render

__version__ = "0.1.0"

__all__ = ["FigureLayout", "MissingDatasetError", "figure_layout",
           "build_figure", "load_curve", "render", "__version__"]
