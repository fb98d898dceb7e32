"""Ensemble bookkeeping shared by the trajectory simulators.

Disentangling the two spreading measures is the whole point of the
ensemble layer: every trajectory reports its center of mass <n> and
second moment <n^2> at each sample time, and the accumulator keeps
running means of <n>, <n>^2 and <n^2> with Welford second moments so
standard errors come out of the same pass.

Reproducibility contract: trajectory i draws from a stream derived
from (master_seed, i) alone, work is split into fixed-size chunks that
do not depend on the worker count, and chunk results are merged in
index order.  The same seed therefore gives bit-identical accumulators
whether the run uses 1 worker or 16.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import multiprocessing

import numpy as np

# Trajectories per work unit.  Fixed so that scheduling cannot change
# how results are grouped and reduced.
CHUNK_SIZE = 64


class InvalidRunError(RuntimeError):
    """Raised when too many trajectories hit the truncation wall."""


@dataclass(frozen=True)
class SeedPolicy:
    """Derives one independent random stream per trajectory index."""

    master_seed: int

    def stream(self, trajectory: int) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(trajectory,))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass
class EnsembleAccumulator:
    """Streaming mean/stderr of <n>, <n>^2 and <n^2> per sample time."""

    times: np.ndarray
    count: int = 0
    n_invalid: int = 0
    _sums: dict = field(default_factory=dict, repr=False)

    _TRACKED = ("com", "com2", "n2")

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if not self._sums:
            for key in self._TRACKED:
                self._sums[key] = [np.zeros_like(self.times), np.zeros_like(self.times)]

    def add(self, com: np.ndarray, n2: np.ndarray) -> None:
        """Fold in one trajectory's sampled <n> and <n^2> series."""
        self.count += 1
        for key, y in (("com", com), ("com2", com * com), ("n2", n2)):
            mean, m2 = self._sums[key]
            delta = y - mean
            mean += delta / self.count
            m2 += delta * (y - mean)

    def merge(self, other: "EnsembleAccumulator") -> None:
        """Fold another accumulator into this one (parallel Welford)."""
        if not np.array_equal(self.times, other.times):
            raise ValueError("cannot merge accumulators with different sampling")
        if other.count == 0:
            self.n_invalid += other.n_invalid
            return
        total = self.count + other.count
        for key in self._TRACKED:
            mean_a, m2_a = self._sums[key]
            mean_b, m2_b = other._sums[key]
            delta = mean_b - mean_a
            mean_a += delta * (other.count / total)
            m2_a += m2_b + delta * delta * (self.count * other.count / total)
        self.count = total
        self.n_invalid += other.n_invalid

    def _mean(self, key):
        return self._sums[key][0].copy()

    def _stderr(self, key):
        if self.count < 2:
            return np.full_like(self.times, np.nan)
        var = self._sums[key][1] / (self.count - 1)
        return np.sqrt(var / self.count)

    @property
    def mean_com(self):
        return self._mean("com")

    @property
    def stderr_com(self):
        return self._stderr("com")

    @property
    def mean_com2(self):
        return self._mean("com2")

    @property
    def stderr_com2(self):
        return self._stderr("com2")

    @property
    def mean_n2(self):
        return self._mean("n2")

    @property
    def stderr_n2(self):
        return self._stderr("n2")


def resolve_workers(n_workers=None) -> int:
    """CLI and tests pass an explicit count; None means one worker."""
    if n_workers is None:
        return 1
    n = int(n_workers)
    if n < 1:
        raise ValueError("worker count must be at least 1")
    return n


def run_chunked(chunk_fn, payload, n_traj: int, times, n_workers=1,
                invalid_cap: float = 0.01) -> EnsembleAccumulator:
    """Run `chunk_fn(payload, start, stop)` over fixed-size index chunks.

    `chunk_fn` must be a module-level function returning an
    EnsembleAccumulator for trajectories [start, stop).  Results are
    merged in chunk order regardless of which worker produced them.
    """
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    n_workers = resolve_workers(n_workers)
    bounds = [
        (start, min(start + CHUNK_SIZE, n_traj))
        for start in range(0, n_traj, CHUNK_SIZE)
    ]
    tasks = [(payload, start, stop) for start, stop in bounds]

    if n_workers == 1:
        parts = [chunk_fn(*task) for task in tasks]
    else:
        with multiprocessing.Pool(processes=n_workers) as pool:
            parts = pool.starmap(chunk_fn, tasks, chunksize=1)

    total = EnsembleAccumulator(times=np.asarray(times, dtype=float))
    for part in parts:
        total.merge(part)

    if total.n_invalid > invalid_cap * n_traj:
        raise InvalidRunError(
            f"{total.n_invalid} of {n_traj} trajectories hit the truncation "
            "wall; enlarge the window"
        )
    return total
