"""Monte Carlo trajectories of the dephased continuous-time walk.

A trajectory alternates an exact coherent stride of length dt_kick
with one realization of independent uniform(-pi, pi) site phases, the
strong-kick limit in which every ensemble-averaged coherence dies
after each kick.  Sampling happens right after the kick; since the
phases are unimodular they leave |psi_n|^2 untouched, so pre- and
post-kick statistics coincide and only one convention is exposed.

Ensemble averages separate E[<n^2>], which grows diffusively with
effective rate J_e = J^2 dt_kick, from E[<n>^2], the squared
center-of-mass displacement that creeps subdiffusively like sqrt(t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coherent import UnitaryKernel, make_kernel, propagate
from .ensemble import EnsembleAccumulator, SeedPolicy, run_chunked
from .lattice import (
    AmplitudeField,
    TruncationMonitor,
    diffusive_radius,
    mean_position,
    probability_of,
    variance,
)


@dataclass(frozen=True)
class KickSchedule:
    """Kick cadence and sampling for a dephased run."""

    dt_kick: float
    t_max: float
    sample_stride: int = 1

    def __post_init__(self):
        if self.dt_kick <= 0:
            raise ValueError("kick interval must be positive")
        if self.sample_stride < 1:
            raise ValueError("sample stride must be at least 1")
        kicks = self.t_max / self.dt_kick
        if abs(kicks - round(kicks)) > 1e-9:
            raise ValueError("t_max must be a whole number of kicks")

    @property
    def n_kicks(self) -> int:
        return int(round(self.t_max / self.dt_kick))

    def sample_indices(self) -> np.ndarray:
        return np.arange(self.sample_stride, self.n_kicks + 1, self.sample_stride)

    def sample_times(self) -> np.ndarray:
        return self.sample_indices() * self.dt_kick


@dataclass
class TrajectoryRecord:
    """Per-sample <n> and <n^2> of one phase realization."""

    times: np.ndarray
    com: np.ndarray
    second_moment: np.ndarray
    valid: bool = True


def apply_random_phases(psi: AmplitudeField, rng: np.random.Generator) -> AmplitudeField:
    """Multiply every site by an independent uniform(-pi, pi) phase."""
    phases = rng.uniform(-np.pi, np.pi, psi.values.size)
    return AmplitudeField(psi.offset, psi.values * np.exp(1j * phases))


def run_trajectory(
    J: float,
    schedule: KickSchedule,
    rng: np.random.Generator,
    radius: int | None = None,
    kernel: UnitaryKernel | None = None,
    monitor: TruncationMonitor | None = None,
) -> TrajectoryRecord:
    """One realization: stride, kick, sample, repeat from a point source."""
    if radius is None:
        radius = diffusive_radius(J * J * schedule.dt_kick, schedule.t_max)
    if kernel is None:
        kernel = make_kernel(J, schedule.dt_kick)
    if monitor is None:
        monitor = TruncationMonitor()

    psi = AmplitudeField.delta(radius)
    indices = schedule.sample_indices()
    com = np.zeros(indices.size)
    second = np.zeros(indices.size)
    valid = True

    cursor = 0
    for kick in range(1, schedule.n_kicks + 1):
        psi = propagate(psi, kernel)
        psi = apply_random_phases(psi, rng)
        if cursor < indices.size and kick == indices[cursor]:
            P = probability_of(psi)
            if not monitor.check_1d(P.values) or abs(P.values.sum() - 1.0) > 1e-10:
                valid = False
            com[cursor] = mean_position(P)
            second[cursor] = variance(P)
            cursor += 1

    return TrajectoryRecord(
        times=schedule.sample_times(), com=com, second_moment=second, valid=valid
    )


def _ensemble_chunk(payload, start, stop) -> EnsembleAccumulator:
    J, schedule, master_seed, radius = payload
    policy = SeedPolicy(master_seed)
    kernel = make_kernel(J, schedule.dt_kick)
    acc = EnsembleAccumulator(times=schedule.sample_times())
    for i in range(start, stop):
        record = run_trajectory(J, schedule, policy.stream(i), radius=radius, kernel=kernel)
        if record.valid:
            acc.add(record.com, record.second_moment)
        else:
            acc.n_invalid += 1
    return acc


def run_ensemble(
    J: float,
    schedule: KickSchedule,
    n_traj: int,
    policy: SeedPolicy,
    n_workers: int = 1,
    radius: int | None = None,
) -> EnsembleAccumulator:
    """Accumulate n_traj independent trajectories.

    Raises InvalidRunError if more than 1% of trajectories trip the
    truncation monitor; excluded trajectories are counted on the
    returned accumulator either way.
    """
    if radius is None:
        radius = diffusive_radius(J * J * schedule.dt_kick, schedule.t_max)
    payload = (J, schedule, policy.master_seed, radius)
    return run_chunked(
        _ensemble_chunk, payload, n_traj, schedule.sample_times(), n_workers=n_workers
    )
