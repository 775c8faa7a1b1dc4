"""Reading the v1 CSV schema.

Every file the simulation side persists starts with the line
``# snalab-schema v1``. Data files follow with a comma-separated header
and unquoted rows; cells never contain commas except possibly a final
free-text column, which is why rows are split at most ``len(header) - 1``
times. The run summary is the same schema line followed by ``key = value``
pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCHEMA_LINE = "# snalab-schema v1"


class SchemaError(ValueError):
    """The file does not announce the supported schema."""


class MissingColumnsError(ValueError):
    """A required column is absent; the message names every missing one."""

    def __init__(self, path: Path, columns) -> None:
        self.path = Path(path)
        self.columns = tuple(columns)
        super().__init__(
            f"{self.path}: missing columns: {', '.join(self.columns)}")


@dataclass(frozen=True)
class Table:
    """One parsed CSV file; cells stay strings until a column is asked for."""

    path: Path
    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[str]:
        if name not in self.columns:
            raise MissingColumnsError(self.path, (name,))
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def floats(self, name: str) -> np.ndarray:
        cells = self.column(name)
        try:
            return np.array([float(c) for c in cells], dtype=float)
        except ValueError as exc:
            raise ValueError(
                f"{self.path}: column {name!r} is not numeric: {exc}"
            ) from None


def _check_schema(path: Path, first_line: str) -> None:
    if first_line.strip() != SCHEMA_LINE:
        raise SchemaError(
            f"{path}: expected first line {SCHEMA_LINE!r}, "
            f"found {first_line.strip()!r}")


def read_table(path, required=()) -> Table:
    """Parse one schema-v1 CSV, checking the header for required columns."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file, no schema line")
    _check_schema(path, lines[0])
    if len(lines) < 2:
        raise SchemaError(f"{path}: no header line after the schema line")
    columns = tuple(c.strip() for c in lines[1].split(","))
    missing = [c for c in required if c not in columns]
    if missing:
        raise MissingColumnsError(path, missing)
    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        cells = tuple(line.split(",", len(columns) - 1))
        if len(cells) != len(columns):
            raise ValueError(
                f"{path}:{lineno}: expected {len(columns)} cells, "
                f"got {len(cells)}")
        rows.append(cells)
    return Table(path=path, columns=columns, rows=tuple(rows))


def read_summary(path) -> dict[str, str]:
    """Parse the report's key-value summary into a plain dict."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file, no schema line")
    _check_schema(path, lines[0])
    out: dict[str, str] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise ValueError(f"{path}:{lineno}: not a 'key = value' line")
        out[key.strip()] = value.strip()
    return out
