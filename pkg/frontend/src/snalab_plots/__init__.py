"""Publication figures from snalab CSV outputs.

This package renders, it does not compute: every number in a figure is
read from a schema-versioned CSV (or the report's key-value summary)
written by the simulation side. Rendering is deterministic, so the same
inputs give byte-identical image files.
"""

from .csvio import (
    SCHEMA_LINE,
    MissingColumnsError,
    SchemaError,
    Table,
    read_summary,
    read_table,
)
from .figures import FigureKind, FigureSpec, render, spec_for_directory

__version__ = "0.1.0"

__all__ = [
    "FigureKind",
    "FigureSpec",
    "MissingColumnsError",
    "SCHEMA_LINE",
    "SchemaError",
    "Table",
    "read_summary",
    "read_table",
    "render",
    "spec_for_directory",
    "__version__",
]
