"""Discrete-time walk of pulse amplitudes in two coupled fiber loops.

One round trip applies a variable coupler (angle beta) between a short
loop u and a long loop w, then shifts the two loops against each other
by one site of the synthetic time-multiplexed lattice:

    u'_n = (cos(beta) u_{n+1} + i sin(beta) w_n) e^{i phi_n}
    w'_n =  i sin(beta) u_n + cos(beta) w_{n-1}

The stochastic phases phi_n, drawn uniform(-pi, pi) each round trip by
the modulator sitting in the u loop, scramble the interference exactly
like the kicks of the continuous-time model.  Near beta = pi/2 the map
reduces to that model with hopping J = cos(beta)/2 and kick interval
2, so the dephased ensemble spreads with J_e = cos(beta)^2 / 2 per
step, while the squared center-of-mass displacement creeps like
sqrt(J_e m).
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .ensemble import EnsembleAccumulator, SeedPolicy, run_chunked
from .lattice import ProbabilityField, TruncationMonitor, diffusive_radius

# Steps of stochastic phases drawn per generator call in the batched
# ensemble path.  Any fixed value gives the same stream; blocks just
# amortize the call overhead.
PHASE_BLOCK = 128


@dataclass
class TwoLoopState:
    """Amplitudes in the two loops on a shared site window."""

    offset: int
    u: np.ndarray
    w: np.ndarray
    step: int = 0

    @classmethod
    def single_pulse(cls, radius: int) -> "TwoLoopState":
        u = np.zeros(2 * radius + 1, dtype=complex)
        w = np.zeros(2 * radius + 1, dtype=complex)
        u[radius] = 1.0
        return cls(offset=-radius, u=u, w=w)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.u.size)

    def occupations(self) -> ProbabilityField:
        p = self.u.real**2 + self.u.imag**2 + self.w.real**2 + self.w.imag**2
        return ProbabilityField(self.offset, p)

    def norm_squared(self) -> float:
        return float(self.occupations().values.sum())


def coupler_matrix(beta: float) -> np.ndarray:
    """The 2x2 loop coupler; unitary for any real beta."""
    cb, sb = math.cos(beta), math.sin(beta)
    return np.array([[cb, 1j * sb], [1j * sb, cb]])


def loop_correspondence(beta: float):
    """(J, dt_kick, J_e) of the continuous-time model this map approaches."""
    J = 0.5 * math.cos(beta)
    dt_kick = 2.0
    return J, dt_kick, J * J * dt_kick


def step_loops(state: TwoLoopState, beta: float, phases=None) -> TwoLoopState:
    """One synchronous round trip; phases (if given) act in the u loop."""
    cb, sb = math.cos(beta), math.sin(beta)
    u, w = state.u, state.w
    un = np.empty_like(u)
    un[:-1] = cb * u[1:]
    un[-1] = 0.0
    un += 1j * sb * w
    if phases is not None:
        un *= np.exp(1j * np.asarray(phases))
    wn = np.empty_like(w)
    wn[1:] = cb * w[:-1]
    wn[0] = 0.0
    wn += 1j * sb * u
    return TwoLoopState(state.offset, un, wn, state.step + 1)


def _sample_indices(m_max: int, stride: int) -> np.ndarray:
    return np.arange(stride, m_max + 1, stride)


def run_loop_coherent(beta: float, m_max: int, sample_stride: int = 1,
                      radius: int | None = None):
    """Deterministic coherent evolution from a single injected pulse.

    Returns (steps, com, second_moment); the support can only grow one
    site per round trip, so the window covers the full cone.
    """
    if radius is None:
        radius = m_max + 5
    state = TwoLoopState.single_pulse(radius)
    indices = _sample_indices(m_max, sample_stride)
    n = state.sites.astype(float)
    com = np.zeros(indices.size)
    second = np.zeros(indices.size)
    cursor = 0
    for m in range(1, m_max + 1):
        state = step_loops(state, beta)
        if cursor < indices.size and m == indices[cursor]:
            P = state.occupations().values
            com[cursor] = float(n @ P)
            second[cursor] = float((n * n) @ P)
            cursor += 1
    return indices.astype(float), com, second


def run_loop_trajectory(beta: float, m_max: int, rng: np.random.Generator,
                        sample_stride: int = 1, radius: int | None = None):
    """One dephased realization, stepping site-by-site (reference path)."""
    if radius is None:
        radius = _dephased_radius(beta, m_max)
    state = TwoLoopState.single_pulse(radius)
    indices = _sample_indices(m_max, sample_stride)
    n = state.sites.astype(float)
    size = state.u.size
    com = np.zeros(indices.size)
    second = np.zeros(indices.size)
    cursor = 0
    for m in range(1, m_max + 1):
        state = step_loops(state, beta, phases=rng.uniform(-np.pi, np.pi, size))
        if cursor < indices.size and m == indices[cursor]:
            P = state.occupations().values
            com[cursor] = float(n @ P)
            second[cursor] = float((n * n) @ P)
            cursor += 1
    return indices.astype(float), com, second


def _dephased_radius(beta: float, m_max: int) -> int:
    _, _, J_e = loop_correspondence(beta)
    return min(m_max + 5, diffusive_radius(J_e, float(m_max)))


def _loop_chunk(payload, start, stop) -> EnsembleAccumulator:
    """Batched chunk: trajectories ride a second array axis in lockstep.

    Each trajectory consumes its own stream in blocks of PHASE_BLOCK
    steps; the draw order matches run_loop_trajectory exactly, so the
    batched and reference paths are bit-identical realization by
    realization.
    """
    beta, m_max, stride, master_seed, radius, dephase = payload
    cb, sb = math.cos(beta), math.sin(beta)
    policy = SeedPolicy(master_seed)
    rngs = [policy.stream(i) for i in range(start, stop)]
    n_traj = stop - start
    size = 2 * radius + 1
    n = np.arange(-radius, radius + 1, dtype=float)

    u = np.zeros((size, n_traj), dtype=complex)
    w = np.zeros((size, n_traj), dtype=complex)
    u[radius, :] = 1.0

    indices = _sample_indices(m_max, stride)
    com = np.zeros((indices.size, n_traj))
    second = np.zeros((indices.size, n_traj))
    valid = np.ones(n_traj, dtype=bool)
    monitor = TruncationMonitor()

    cursor = 0
    block = None
    for m in range(1, m_max + 1):
        if dephase:
            pos = (m - 1) % PHASE_BLOCK
            if pos == 0:
                length = min(PHASE_BLOCK, m_max - (m - 1))
                block = np.empty((n_traj, length, size))
                for b, rng in enumerate(rngs):
                    block[b] = rng.uniform(-np.pi, np.pi, (length, size))
        un = np.empty_like(u)
        un[:-1] = cb * u[1:]
        un[-1] = 0.0
        un += 1j * sb * w
        if dephase:
            un *= np.exp(1j * block[:, pos, :].T)
        wn = np.empty_like(w)
        wn[1:] = cb * w[:-1]
        wn[0] = 0.0
        wn += 1j * sb * u
        u, w = un, wn

        if cursor < indices.size and m == indices[cursor]:
            P = u.real**2 + u.imag**2 + w.real**2 + w.imag**2
            boundary = P[: monitor.edge_sites].sum(axis=0) + P[-monitor.edge_sites :].sum(axis=0)
            valid &= boundary <= monitor.threshold
            valid &= np.abs(P.sum(axis=0) - 1.0) <= 1e-10
            com[cursor] = n @ P
            second[cursor] = (n * n) @ P
            cursor += 1

    acc = EnsembleAccumulator(times=indices.astype(float))
    for b in range(n_traj):
        if valid[b]:
            acc.add(com[:, b], second[:, b])
        else:
            acc.n_invalid += 1
    return acc


def run_loop_ensemble(
    beta: float,
    m_max: int,
    n_traj: int,
    policy: SeedPolicy,
    n_workers: int = 1,
    sample_stride: int = 1,
    radius: int | None = None,
    dephase: bool = True,
) -> EnsembleAccumulator:
    """Ensemble of dephased loop walks from a single injected pulse.

    With dephase=False the map is deterministic and a single
    trajectory reproduces the coherent record.
    """
    if radius is None:
        radius = _dephased_radius(beta, m_max) if dephase else m_max + 5
    payload = (beta, m_max, sample_stride, policy.master_seed, radius, dephase)
    times = _sample_indices(m_max, sample_stride).astype(float)
    return run_chunked(_loop_chunk, payload, n_traj, times, n_workers=n_workers)
