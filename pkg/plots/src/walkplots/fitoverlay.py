"""Power-law fit overlay.

Renders one series column on log axes together with the fitted power
law taken from a JSON fit report (exponent, prefactor, window); the
fit window is shaded.  The fit itself comes from the report file, this
script never refits.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .csvio import PlotDataError, read_table, require_columns
from .render import MEASURED_STYLE, THEORY_STYLE, new_panels, save


def load_fit(path: str) -> dict:
    try:
        with open(path) as fh:
            report = json.load(fh)
    except OSError as err:
        raise PlotDataError(f"cannot read {path}: {err}")
    except json.JSONDecodeError as err:
        raise PlotDataError(f"{path} is not valid JSON: {err}")
    fit = report.get("fit", report)
    missing = [key for key in ("exponent", "prefactor", "window") if key not in fit]
    if missing:
        raise PlotDataError(f"{path} fit report lacks: {', '.join(missing)}")
    return fit


def render(input_path: str, column: str, time_column: str, fit_path: str,
           out_path: str) -> None:
    table = read_table(input_path)
    require_columns(table, (time_column, column), input_path)
    fit = load_fit(fit_path)

    t = table[time_column]
    fig, (ax,) = new_panels(1, width=4.2, height=3.4)
    ax.loglog(t, table[column], label=column, **MEASURED_STYLE)
    stderr_column = f"{column}_stderr"
    if stderr_column in table:
        ax.fill_between(t, table[column] - table[stderr_column],
                        table[column] + table[stderr_column],
                        alpha=0.25, color=MEASURED_STYLE["color"], lw=0)
    curve = fit["prefactor"] * np.asarray(t, dtype=float) ** fit["exponent"]
    ax.loglog(
        t, curve,
        label=f"{fit['prefactor']:.3g} t^{fit['exponent']:.3g}",
        **THEORY_STYLE,
    )
    lo, hi = fit["window"]
    ax.axvspan(lo, hi, color="0.9", zorder=0)
    ax.set_xlabel(time_column)
    ax.set_ylabel(column)
    ax.legend(frameon=False)
    save(fig, out_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--input", required=True, help="series CSV")
    parser.add_argument("--column", required=True, help="value column to plot")
    parser.add_argument("--time-column", default="t")
    parser.add_argument("--fit", required=True, help="JSON fit report")
    parser.add_argument("--output", required=True, help="image path (.png/.svg)")
    args = parser.parse_args(argv)
    try:
        render(args.input, args.column, args.time_column, args.fit, args.output)
    except PlotDataError as err:
        print(f"plot-fit-overlay: error: {err}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())
