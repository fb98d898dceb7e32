"""Correlation-grid heatmaps.

Each input is a grid snapshot CSV (columns n, m, C); one panel per
snapshot, log color scale to make the diagonal ridge visible next to
the Gaussian background.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
from matplotlib.colors import LogNorm

from .csvio import PlotDataError, read_comments, read_table, require_columns
from .render import new_panels, save

# color range shown below the peak, in decades
COLOR_DECADES = 5.0


def load_grid(path: str):
    """Rebuild the square grid from the flat (n, m, C) rows."""
    table = read_table(path)
    require_columns(table, ("n", "m", "C"), path)
    n_sites = np.unique(table["n"])
    size = n_sites.size
    if size * size != table["C"].size:
        raise PlotDataError(f"{path}: rows do not form a square grid")
    order = np.lexsort((table["m"], table["n"]))
    grid = table["C"][order].reshape(size, size)
    label = next((c for c in read_comments(path) if c.startswith("snapshot")), "")
    return n_sites, grid, label


def render(paths, out_path: str) -> None:
    loaded = [load_grid(path) for path in paths]
    fig, axes = new_panels(len(loaded), width=3.6, height=3.2)
    for ax, (sites, grid, label) in zip(axes, loaded):
        top = float(grid.max())
        if top <= 0.0:
            raise PlotDataError("snapshot grid holds no positive entries")
        floor = top * 10.0 ** (-COLOR_DECADES)
        lo, hi = sites[0] - 0.5, sites[-1] + 0.5
        image = ax.imshow(
            np.maximum(grid, floor),
            origin="lower",
            extent=(lo, hi, lo, hi),
            norm=LogNorm(vmin=floor, vmax=top),
            cmap="viridis",
        )
        ax.set_xlabel("m")
        ax.set_ylabel("n")
        if label:
            ax.set_title(label, fontsize=9)
        fig.colorbar(image, ax=ax, shrink=0.85)
    save(fig, out_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--input", action="append", required=True,
                        help="grid snapshot CSV (repeatable, one panel each)")
    parser.add_argument("--output", required=True, help="image path (.png/.svg)")
    args = parser.parse_args(argv)
    try:
        render(args.input, args.output)
    except PlotDataError as err:
        print(f"plot-correlation-heatmaps: error: {err}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())
