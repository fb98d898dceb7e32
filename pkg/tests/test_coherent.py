"""Coherent stride kernel against closed forms and a dense-propagator oracle.

The oracle route builds the tridiagonal hopping generator on a finite
lattice and exponentiates it densely with scipy; the kernel route never
touches a matrix exponential, so agreement pins down both the Bessel
evaluation and the (-i)^k phase convention.
"""

import numpy as np
import pytest
import scipy.linalg

from dephase_walk.bessel import besselj_sequence
from dephase_walk.coherent import (
    analytic_coherent_probability,
    analytic_coherent_profile,
    make_kernel,
    propagate,
)
from dephase_walk.lattice import (
    AmplitudeField,
    TruncationMonitor,
    coherent_radius,
    mean_position,
    probability_of,
    variance,
)

# J_0(2)^2, frozen from the ascending-series oracle in test_bessel.
J0_OF_2_SQUARED = 0.050127080984469545


def dense_propagator(n_sites: int, J: float, t: float) -> np.ndarray:
    h = np.zeros((n_sites, n_sites))
    for i in range(n_sites - 1):
        h[i, i + 1] = h[i + 1, i] = J
    return scipy.linalg.expm(-1j * h * t)


def test_small_stride_expansion():
    k = make_kernel(1.0, 1e-4)
    assert k.tap(0) == pytest.approx(1.0, abs=1e-8)
    assert k.tap(1) == pytest.approx(-1e-4j, rel=1e-7)
    assert k.tap(-1) == k.tap(1)
    assert abs(k.tap(2)) < 1e-7


def test_tap_magnitudes_are_bessel_values():
    k = make_kernel(1.0, 0.5)
    seq = besselj_sequence(1.0, k.cutoff)
    for order in range(k.cutoff + 1):
        assert abs(k.tap(order)) ** 2 == pytest.approx(seq[order] ** 2, abs=1e-15)
    weight = np.sum(np.abs(k.taps) ** 2)
    assert weight == pytest.approx(1.0, abs=1e-12)


def test_kernel_symmetry_and_identity():
    k = make_kernel(2.0, 1.3)
    taps = k.taps
    assert np.array_equal(taps, taps[::-1])
    ident = make_kernel(1.0, 0.0)
    assert ident.taps.tolist() == [1.0]


def test_kernel_matches_dense_propagator_column():
    J, t, n_sites = 1.0, 3.5, 64
    u = dense_propagator(n_sites, J, t)
    center = n_sites // 2
    k = make_kernel(J, t)
    column = np.array([k.tap(n - center) for n in range(n_sites)])
    assert np.max(np.abs(column - u[:, center])) < 1e-9


def test_propagation_matches_dense_propagator_state():
    J, n_sites = 1.0, 64
    rng = np.random.default_rng(17)
    values = rng.normal(size=n_sites) + 1j * rng.normal(size=n_sites)
    # Concentrate support near the middle so the hard wall stays dark.
    values[:29] = 0.0
    values[-29:] = 0.0
    values /= np.linalg.norm(values)
    psi = AmplitudeField(offset=-n_sites // 2, values=values)
    for t in (0.7, 2.0, 5.0):
        expected = dense_propagator(n_sites, J, t) @ values
        got = propagate(psi, make_kernel(J, t))
        assert np.max(np.abs(got.values - expected)) < 1e-9


def test_delta_propagation_gives_bessel_profile():
    J, t = 1.0, 3.5
    radius = coherent_radius(J, t)
    psi = propagate(AmplitudeField.delta(radius), make_kernel(J, t))
    P = probability_of(psi)
    expected = analytic_coherent_profile(radius, J, t)
    assert np.max(np.abs(P.values - expected.values)) < 1e-12
    assert np.array_equal(P.values, P.values[::-1])  # parity, exactly


def test_two_half_strides_equal_one():
    J, t = 1.0, 2.4
    radius = coherent_radius(J, t)
    half = make_kernel(J, t / 2)
    once = propagate(AmplitudeField.delta(radius), make_kernel(J, t))
    twice = propagate(propagate(AmplitudeField.delta(radius), half), half)
    assert np.max(np.abs(once.values - twice.values)) < 1e-10


def test_norm_drift_over_many_strides():
    k = make_kernel(1.0, 0.25)
    psi = AmplitudeField.delta(40)
    drift = abs(propagate(psi, k).norm_squared() - 1.0)
    assert drift < 1e-12
    # A long chain of strides on a wide-enough window stays normalized.
    radius = coherent_radius(1.0, 0.25 * 300)
    psi = AmplitudeField.delta(radius)
    for _ in range(300):
        psi = propagate(psi, k)
    assert abs(psi.norm_squared() - 1.0) < 1e-10


def test_ballistic_variance_growth():
    J = 1.0
    radius = coherent_radius(J, 20.0)
    monitor = TruncationMonitor()
    for t in (0.5, 2.0, 7.5, 20.0):
        psi = propagate(AmplitudeField.delta(radius), make_kernel(J, t))
        P = probability_of(psi)
        assert monitor.check_1d(P.values)
        assert variance(P) == pytest.approx(2.0 * J * J * t * t, rel=1e-6)
        assert abs(mean_position(P)) < 1e-10


def test_analytic_profile_values():
    assert analytic_coherent_probability(0, 1.0, 0.0) == 1.0
    assert analytic_coherent_probability(0, 1.0, 1.0) == pytest.approx(
        J0_OF_2_SQUARED, abs=1e-14
    )
    # Normalization across the light cone.
    J, t = 1.0, 6.0
    radius = int(2 * J * t) + 40
    profile = analytic_coherent_profile(radius, J, t)
    assert profile.total() == pytest.approx(1.0, abs=1e-10)
    assert mean_position(profile) == pytest.approx(0.0, abs=1e-10)


def test_kernel_rejects_bad_arguments():
    with pytest.raises(ValueError):
        make_kernel(-1.0, 0.5)
    with pytest.raises(ValueError):
        make_kernel(1.0, -0.5)
    with pytest.raises(ValueError):
        make_kernel(1.0, 0.5, tol=1e-3)
