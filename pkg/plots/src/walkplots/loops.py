"""Spreading panels for the two-loop pulse walk.

Same layout as the continuous-time figure, but against the round-trip
count m: coherent variance with its ballistic overlay, dephased mean
occupation spread, and the mean-displacement creep.
"""

from __future__ import annotations

import argparse
import sys

from .csvio import PlotDataError, read_table, require_columns
from .render import MEASURED_STYLE, THEORY_STYLE, new_panels, save

ENSEMBLE_COLUMNS = ("m", "mean_n2", "mean_n2_stderr", "theory_n2",
                    "mean_com2", "mean_com2_stderr", "theory_com2")
COHERENT_COLUMNS = ("m", "var", "theory_var")


def classify_inputs(paths):
    coherent = None
    ensemble = None
    for path in paths:
        table = read_table(path)
        if "mean_n2" in table:
            require_columns(table, ENSEMBLE_COLUMNS, path)
            if ensemble is not None:
                raise PlotDataError("more than one ensemble CSV given")
            ensemble = (path, table)
        elif "var" in table:
            require_columns(table, COHERENT_COLUMNS, path)
            if coherent is not None:
                raise PlotDataError("more than one coherent CSV given")
            coherent = (path, table)
        else:
            raise PlotDataError(
                f"{path} has neither ensemble (mean_n2 ...) nor coherent "
                f"(var ...) loop columns (has: {', '.join(table)})"
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
        ax.loglog(table["m"], table["var"], label="coherent", **MEASURED_STYLE)
        ax.loglog(table["m"], table["theory_var"], label="ballistic",
                  **THEORY_STYLE)
        ax.set_xlabel("m")
        ax.set_ylabel("var(n)")
        ax.legend(frameon=False)

    if ensemble:
        _, table = ensemble
        ax = axes[cursor]
        cursor += 1
        ax.errorbar(table["m"], table["mean_n2"], yerr=table["mean_n2_stderr"],
                    label="dephased", **MEASURED_STYLE)
        ax.loglog(table["m"], table["theory_n2"], label="diffusive",
                  **THEORY_STYLE)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("m")
        ax.set_ylabel(r"mean $\langle n^2 \rangle$")
        ax.legend(frameon=False)

        ax = axes[cursor]
        ax.errorbar(table["m"], table["mean_com2"], yerr=table["mean_com2_stderr"],
                    label="mean displacement$^2$", **MEASURED_STYLE)
        ax.loglog(table["m"], table["theory_com2"], label="creep overlay",
                  **THEORY_STYLE)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("m")
        ax.set_ylabel(r"mean $\langle n \rangle^2$")
        ax.legend(frameon=False)

    save(fig, out_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--input", action="append", required=True,
                        help="loop CSV (repeat for coherent + ensemble)")
    parser.add_argument("--output", required=True, help="image path (.png/.svg)")
    args = parser.parse_args(argv)
    try:
        render(args.input, args.output)
    except PlotDataError as err:
        print(f"plot-loop-spreading: error: {err}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())
