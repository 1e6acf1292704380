"""Figure rendering for inverter fault-scenario simulation traces."""

from .figures import FigureSpec, SchemaError, build_figure, default_zooms, load_trace, render

__version__ = "0.1.0"
