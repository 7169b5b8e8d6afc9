"""Figure rendering for symkg experiment outputs."""

__version__ = "0.1.0"

from .figures import KINDS, FigureSpec, SchemaError, render

__all__ = ["KINDS", "FigureSpec", "SchemaError", "render", "__version__"]
