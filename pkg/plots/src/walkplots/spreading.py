"""Spreading panels for the continuous-time walk.

Takes the coherent run and/or the dephased ensemble CSV and renders
the occupation-spread and mean-displacement-creep panels on log axes,
with the theory overlays taken from the theory_* columns.
"""

from __future__ import annotations

import argparse
import sys

from .csvio import PlotDataError, read_table, require_columns
from .render import MEASURED_STYLE, THEORY_STYLE, new_panels, save

ENSEMBLE_COLUMNS = ("t", "mean_n2", "mean_n2_stderr", "theory_n2",
                    "mean_com2", "mean_com2_stderr", "theory_com2")
COHERENT_COLUMNS = ("t", "n2", "theory_n2")


def classify_inputs(paths):
    """Sort input CSVs into (coherent, ensemble) by their headers."""
    coherent = None
    ensemble = None
    for path in paths:
        table = read_table(path)
        if "mean_n2" in table:
            require_columns(table, ENSEMBLE_COLUMNS, path)
            if ensemble is not None:
                raise PlotDataError("more than one ensemble CSV given")
            ensemble = (path, table)
        elif "n2" in table:
            require_columns(table, COHERENT_COLUMNS, path)
            if coherent is not None:
                raise PlotDataError("more than one coherent CSV given")
            coherent = (path, table)
        else:
            raise PlotDataError(
                f"{path} has neither ensemble (mean_n2 ...) nor coherent "
                f"(n2 ...) spreading columns (has: {', '.join(table)})"
            )
    if ensemble is None and coherent is None:
        raise PlotDataError("no usable input CSVs")
    return coherent, ensemble


def render(paths, out_path: str) -> None:
    coherent, ensemble = classify_inputs(paths)
    n_panels = (1 if coherent else 0) + (2 if ensemble else 0)
    fig, axes = new_panels(n_panels)
    cursor = 0

    if coherent:
        _, table = coherent
        ax = axes[cursor]
        cursor += 1
        ax.loglog(table["t"], table["n2"], label="coherent", **MEASURED_STYLE)
        ax.loglog(table["t"], table["theory_n2"], label="ballistic", **THEORY_STYLE)
        ax.set_xlabel("t")
        ax.set_ylabel(r"$\langle n^2 \rangle$")
        ax.legend(frameon=False)

    if ensemble:
        _, table = ensemble
        ax = axes[cursor]
        cursor += 1
        ax.errorbar(table["t"], table["mean_n2"], yerr=table["mean_n2_stderr"],
                    label="dephased", **MEASURED_STYLE)
        ax.loglog(table["t"], table["theory_n2"], label="diffusive", **THEORY_STYLE)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel(r"mean $\langle n^2 \rangle$")
        ax.legend(frameon=False)

        ax = axes[cursor]
        ax.errorbar(table["t"], table["mean_com2"], yerr=table["mean_com2_stderr"],
                    label="mean displacement$^2$", **MEASURED_STYLE)
        ax.loglog(table["t"], table["theory_com2"], label="creep overlay",
                  **THEORY_STYLE)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel(r"mean $\langle n \rangle^2$")
        ax.legend(frameon=False)

    save(fig, out_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--input", action="append", required=True,
                        help="spreading CSV (repeat for coherent + ensemble)")
    parser.add_argument("--output", required=True, help="image path (.png/.svg)")
    args = parser.parse_args(argv)
    try:
        render(args.input, args.output)
    except PlotDataError as err:
        print(f"plot-spreading: error: {err}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())
