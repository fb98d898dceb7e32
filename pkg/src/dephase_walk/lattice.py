"""Site-indexed field containers and observables for 1D lattice walks.

Every simulator in this package works on a finite, symmetric window of
lattice sites centered on the excitation site n = 0.  The window is
preallocated from the run's maximum time (ballistic light cone for
coherent propagation, diffusive envelope otherwise) and bounded by a
hard wall.  A :class:`TruncationMonitor` watches the probability that
accumulates near the wall so that a too-small window is detected
instead of silently reflecting mass back into the bulk.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

# Entries more negative than this are treated as integrator bugs, not
# floating-point noise.
NEGATIVE_FLOOR = -1e-14


@dataclass
class AmplitudeField:
    """Complex wavefunction psi_n stored on a contiguous site range.

    Attributes
    ----------
    offset : int
        Site index of the first stored entry.
    values : ndarray of complex
        Amplitudes psi_n for n = offset .. offset + len(values) - 1.
    """

    offset: int
    values: np.ndarray

    @classmethod
    def delta(cls, radius: int, site: int = 0) -> "AmplitudeField":
        """A point excitation at `site` on the window [-radius, radius]."""
        values = np.zeros(2 * radius + 1, dtype=complex)
        values[radius + site] = 1.0
        return cls(offset=-radius, values=values)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.values.size)

    def norm_squared(self) -> float:
        v = self.values
        return float(np.sum(v.real * v.real + v.imag * v.imag))

    def copy(self) -> "AmplitudeField":
        return AmplitudeField(self.offset, self.values.copy())


@dataclass
class ProbabilityField:
    """Real site occupations P_n on a contiguous site range."""

    offset: int
    values: np.ndarray

    @classmethod
    def delta(cls, radius: int, site: int = 0) -> "ProbabilityField":
        values = np.zeros(2 * radius + 1)
        values[radius + site] = 1.0
        return cls(offset=-radius, values=values)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.values.size)

    def total(self) -> float:
        return float(self.values.sum())

    def copy(self) -> "ProbabilityField":
        return ProbabilityField(self.offset, self.values.copy())


def probability_of(psi: AmplitudeField) -> ProbabilityField:
    """Site occupations P_n = |psi_n|^2, preserving the window offset."""
    v = psi.values
    return ProbabilityField(psi.offset, v.real * v.real + v.imag * v.imag)


def mean_position(P: ProbabilityField) -> float:
    """First moment sum_n n P_n of a normalized occupation field."""
    return float(np.dot(P.sites, P.values))


def variance(P: ProbabilityField) -> float:
    """Second moment sum_n n^2 P_n about the excitation site.

    The walks here start from a point excitation at n = 0 and stay
    parity-symmetric on average, so the second moment about the origin
    is the spreading variance.
    """
    n = P.sites
    return float(np.dot(n * n, P.values))


def sanitize_probabilities(values: np.ndarray, drift_tol: float = 1e-12) -> np.ndarray:
    """Clamp floating-point negatives to zero without touching real mass flow.

    Entries in [NEGATIVE_FLOOR, 0) are rounding debris from the ODE
    steppers and are set to zero in place.  Anything below the floor is
    left alone so that positivity checks downstream can catch it.  If
    zeroing the debris shifted the total by more than `drift_tol`, the
    field is rescaled back to its pre-clamp total; smaller shifts are
    left untouched, and genuine mass loss at the hard wall is never
    compensated (the truncation monitor owns that).
    """
    debris = (values < 0.0) & (values > NEGATIVE_FLOOR)
    if debris.any():
        before = values.sum()
        values[debris] = 0.0
        after = values.sum()
        if abs(after - before) > drift_tol and after > 0.0:
            values *= before / after
    return values


@dataclass
class TruncationMonitor:
    """Watches probability near the hard wall of a truncated window.

    Any run whose boundary mass exceeds `threshold` at a sample time is
    flagged invalid.  `edge_sites` outermost entries on each side (each
    outermost ring for a 2D grid) count as the boundary.
    """

    edge_sites: int = 3
    threshold: float = 1e-8
    worst: float = field(default=0.0, init=False)
    tripped: bool = field(default=False, init=False)

    def record(self, boundary_mass: float) -> bool:
        """Record one boundary-mass reading; True while the run is clean."""
        if boundary_mass > self.worst:
            self.worst = boundary_mass
        if boundary_mass > self.threshold:
            self.tripped = True
        return not self.tripped

    def check_1d(self, values: np.ndarray) -> bool:
        k = self.edge_sites
        if values.ndim == 2:
            return self.check_2d(values)
        v = values if values.dtype.kind == "f" else np.abs(values) ** 2
        return self.record(float(v[:k].sum() + v[-k:].sum()))

    def check_2d(self, grid: np.ndarray) -> bool:
        k = self.edge_sites
        outer = float(grid.sum())
        inner = float(grid[k:-k, k:-k].sum())
        return self.record(outer - inner)


def coherent_radius(J: float, t_max: float, margin: int = 10) -> int:
    """Window half-width for coherent runs: light cone 2Jt plus slack."""
    return int(math.ceil(3.0 * J * t_max)) + margin


def diffusive_radius(rate: float, t_max: float, margin: int = 30) -> int:
    """Window half-width for dephased runs: diffusive envelope plus slack."""
    return int(math.ceil(8.0 * math.sqrt(max(rate * t_max, 0.0)))) + margin
