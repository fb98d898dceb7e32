"""Power-law fits and route comparisons for spreading observables.

A spreading record is a pair of arrays (times, values).  The two
operations here are the log-log least-squares fit used to read off the
spreading exponent and prefactor over a stated window, and an
interpolating comparison of a measured series against a reference
series from an independent route.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpreadingSeries:
    times: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1d arrays of equal length")
        if times.size and not np.all(np.diff(times) > 0.0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(values)):
            raise ValueError("series contains non-finite entries")

    def window(self, t_lo: float, t_hi: float) -> "SpreadingSeries":
        keep = (self.times >= t_lo) & (self.times <= t_hi)
        return SpreadingSeries(self.times[keep], self.values[keep], self.label)


@dataclass(frozen=True)
class PowerLawFit:
    """Result of fitting values = prefactor * t**exponent over a window."""

    exponent: float
    prefactor: float
    window: tuple = (0.0, 0.0)
    residual: float = 0.0
    exponent_stderr: float = field(default=float("nan"))
    n_points: int = 0

    def evaluate(self, times) -> np.ndarray:
        return self.prefactor * np.asarray(times, dtype=float) ** self.exponent

    def record(self) -> dict:
        return {
            "exponent": self.exponent,
            "prefactor": self.prefactor,
            "window": list(self.window),
            "residual": self.residual,
            "exponent_stderr": self.exponent_stderr,
            "n_points": self.n_points,
        }


def fit_power_law(series: SpreadingSeries, t_lo: float, t_hi: float,
                  min_points: int = 10) -> PowerLawFit:
    """Least-squares fit of log(values) against log(times) on a window.

    Parameters
    ----------
    series : SpreadingSeries
        Record to fit; every point inside the window must be strictly
        positive, in both time and value.
    t_lo, t_hi : float
        Inclusive window bounds.
    min_points : int
        Fewer window points than this raise ValueError, since an
        exponent read off a near-degenerate window is meaningless.

    Returns
    -------
    PowerLawFit
        Exponent, prefactor, rms log residual and the standard error
        of the exponent estimated from those residuals.
    """
    if t_hi <= t_lo:
        raise ValueError("window must satisfy t_lo < t_hi")
    cut = series.window(t_lo, t_hi)
    if cut.times.size < min_points:
        raise ValueError(
            f"window [{t_lo}, {t_hi}] holds {cut.times.size} samples, "
            f"need at least {min_points}"
        )
    if np.any(cut.times <= 0.0) or np.any(cut.values <= 0.0):
        raise ValueError("power-law fit needs strictly positive times and values")

    x = np.log(cut.times)
    y = np.log(cut.values)
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])

    trend = design @ coef
    resid = y - trend
    dof = x.size - 2
    rms = float(np.sqrt(np.mean(resid**2)))
    if dof > 0:
        sigma2 = float(resid @ resid) / dof
        sxx = float(np.sum((x - x.mean()) ** 2))
        stderr = float(np.sqrt(sigma2 / sxx)) if sxx > 0.0 else float("nan")
    else:
        stderr = float("nan")

    return PowerLawFit(
        exponent=slope,
        prefactor=float(np.exp(intercept)),
        window=(float(t_lo), float(t_hi)),
        residual=rms,
        exponent_stderr=stderr,
        n_points=int(x.size),
    )


@dataclass(frozen=True)
class SeriesComparison:
    max_rel_dev: float
    mean_rel_dev: float
    n_points: int
    rel_tol: float

    @property
    def passed(self) -> bool:
        return self.max_rel_dev <= self.rel_tol

    def record(self) -> dict:
        return {
            "max_rel_dev": self.max_rel_dev,
            "mean_rel_dev": self.mean_rel_dev,
            "n_points": self.n_points,
            "rel_tol": self.rel_tol,
            "passed": self.passed,
        }


def compare_series(measured: SpreadingSeries, reference: SpreadingSeries,
                   rel_tol: float) -> SeriesComparison:
    """Relative deviation of a measured series from a reference route.

    The reference is linearly interpolated onto the measured sample
    times; only measured times inside the reference range count, and
    an empty overlap is an error rather than a vacuous pass.
    """
    if reference.times.size < 2:
        raise ValueError("reference series needs at least two samples")
    lo, hi = reference.times[0], reference.times[-1]
    keep = (measured.times >= lo) & (measured.times <= hi)
    if not keep.any():
        raise ValueError("measured and reference time ranges do not overlap")
    t = measured.times[keep]
    got = measured.values[keep]
    want = np.interp(t, reference.times, reference.values)
    if np.any(want == 0.0):
        raise ValueError("reference values must be nonzero inside the overlap")
    dev = np.abs(got - want) / np.abs(want)
    return SeriesComparison(
        max_rel_dev=float(dev.max()),
        mean_rel_dev=float(dev.mean()),
        n_points=int(t.size),
        rel_tol=float(rel_tol),
    )
