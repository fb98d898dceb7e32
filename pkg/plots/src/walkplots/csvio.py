"""Reading the simulator's CSV interchange files."""

from __future__ import annotations

import numpy as np


class PlotDataError(Exception):
    """Anything wrong with an input file: unreadable, empty, missing columns."""


def read_comments(path: str) -> list:
    """The # provenance lines at the top of a CSV, without the marker."""
    out = []
    try:
        with open(path) as fh:
            for line in fh:
                if line.lstrip().startswith("#"):
                    out.append(line.lstrip()[1:].strip())
                elif line.strip():
                    break
    except OSError as err:
        raise PlotDataError(f"cannot read {path}: {err}")
    return out


def read_table(path: str) -> dict:
    """Parse a header-row CSV into a column dict, skipping # comments."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise PlotDataError(f"cannot read {path}: {err}")
    rows = [line for line in lines if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise PlotDataError(f"{path} holds no header row")
    names = [cell.strip() for cell in rows[0].split(",")]
    if len(rows) == 1:
        raise PlotDataError(f"{path} holds a header but no data rows")
    try:
        data = np.array([[float(cell) for cell in row.split(",")] for row in rows[1:]])
    except ValueError as err:
        raise PlotDataError(f"{path}: non-numeric cell ({err})")
    if data.shape[1] != len(names):
        raise PlotDataError(f"{path}: rows do not match the header width")
    return {name: data[:, i] for i, name in enumerate(names)}


def require_columns(table: dict, names, source: str) -> None:
    missing = [name for name in names if name not in table]
    if missing:
        raise PlotDataError(
            f"{source} is missing columns: {', '.join(missing)} "
            f"(has: {', '.join(table)})"
        )
