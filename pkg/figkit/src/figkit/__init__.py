"""Figure rendering for opdyn sweep CSVs."""

from .render import build_figure, render
from .spec import FigureError, FigureSpec, load_spec, load_table

__version__ = "0.1.0"
