"""The 1D incoherent hopping master equation and its closed-form solution.

Once the phase kicks arrive faster than the hopping builds coherence,
site populations obey a classical rate equation with effective rate
J_e = J^2 dt_kick,

    dP_n/dt = J_e (P_{n+1} + P_{n-1} - 2 P_n),

whose point-source solution is P_n(t) = e^{-2 J_e t} I_n(2 J_e t) with
variance exactly 2 J_e t.  This module integrates the rate equation
with fixed-step RK4 (the problem is non-stiff at the mandated step
policy and fixed steps keep runs deterministic) and exposes the closed
form as the oracle the integrator is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .bessel import besseli_scaled_sequence
from .lattice import ProbabilityField, TruncationMonitor, sanitize_probabilities

# Fixed-step RK4 stays comfortably accurate up to dt = 0.1 / J_e.
STEP_POLICY = 0.1


@dataclass(frozen=True)
class MasterConfig:
    """Run parameters for the 1D rate equation."""

    J_e: float
    dt_ode: float
    t_max: float

    def __post_init__(self):
        if self.J_e < 0:
            raise ValueError("hopping rate must be nonnegative")
        if self.dt_ode <= 0 or self.t_max < 0:
            raise ValueError("step and horizon must be positive")
        _check_step(self.J_e, self.dt_ode)


def _check_step(J_e: float, dt_ode: float):
    if J_e > 0 and dt_ode > STEP_POLICY / J_e * (1 + 1e-12):
        raise ValueError(
            f"dt_ode = {dt_ode} violates the step policy {STEP_POLICY}/J_e"
        )


def _rate(P: np.ndarray, J_e: float) -> np.ndarray:
    out = -2.0 * P
    out[:-1] += P[1:]
    out[1:] += P[:-1]
    out *= J_e
    return out


def step_master(P: ProbabilityField, J_e: float, dt_ode: float) -> ProbabilityField:
    """One RK4 step of the rate equation on the same window."""
    _check_step(J_e, dt_ode)
    y = P.values
    k1 = _rate(y, J_e)
    k2 = _rate(y + 0.5 * dt_ode * k1, J_e)
    k3 = _rate(y + 0.5 * dt_ode * k2, J_e)
    k4 = _rate(y + dt_ode * k3, J_e)
    out = y + (dt_ode / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return ProbabilityField(P.offset, sanitize_probabilities(out))


def evolve_master(
    config: MasterConfig,
    sample_times,
    radius: int | None = None,
    monitor: TruncationMonitor | None = None,
):
    """Integrate from a point source, sampling the profile at given times.

    Each sample time is hit exactly by subdividing the interval into
    uniform steps no longer than `config.dt_ode`.  Returns the list of
    sampled ProbabilityFields in time order.
    """
    sample_times = np.asarray(sample_times, dtype=float)
    if sample_times.size and sample_times.max() > config.t_max + 1e-12:
        raise ValueError("sample time beyond configured horizon")
    if np.any(np.diff(sample_times) <= 0):
        raise ValueError("sample times must be strictly increasing")
    if radius is None:
        from .lattice import diffusive_radius

        radius = diffusive_radius(config.J_e, config.t_max)
    if monitor is None:
        monitor = TruncationMonitor()

    P = ProbabilityField.delta(radius)
    now = 0.0
    out = []
    for target in sample_times:
        span = target - now
        if span > 0:
            n_steps = max(1, int(math.ceil(span / config.dt_ode - 1e-12)))
            h = span / n_steps
            for _ in range(n_steps):
                P = step_master(P, config.J_e, h)
        now = target
        monitor.check_1d(P.values)
        out.append(P.copy())
    return out


def analytic_classical_probability(n: int, J_e: float, t: float) -> float:
    """Closed-form occupation e^{-2 J_e t} I_n(2 J_e t) of site n."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    x = 2.0 * J_e * t
    return float(besseli_scaled_sequence(x, abs(n))[abs(n)])


def analytic_classical_profile(radius: int, J_e: float, t: float) -> ProbabilityField:
    """The closed-form profile on the window [-radius, radius]."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    half = besseli_scaled_sequence(2.0 * J_e * t, radius)
    values = np.concatenate([half[:0:-1], half])
    return ProbabilityField(offset=-radius, values=values)
