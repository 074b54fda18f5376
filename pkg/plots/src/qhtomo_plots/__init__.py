"""Figure rendering for homodyne tomography reconstruction artifacts."""

from .formats import ParseError, grid_axis, read_csv_rows, read_grid, read_manifest
from .render import FIGURE_KINDS, FigureRequest, render

__version__ = "0.1.0"

__all__ = [
    "FIGURE_KINDS",
    "FigureRequest",
    "ParseError",
    "grid_axis",
    "read_csv_rows",
    "read_grid",
    "read_manifest",
    "render",
    "__version__",
]
