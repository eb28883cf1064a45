import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from purcellkit.core import CavityMode, EmitterTransition
from purcellkit.dynamics import (
    DetuningScan,
    Histogram,
    coupled_lifetime,
    draw_arrival_times,
    expected_counts,
    lifetime_vs_detuning,
    simulate_histogram,
    wrapped_exponential_mean,
)

NV1 = EmitterTransition(637.0, 11.1, 0.03)
PERIOD = 1000.0 / 4.75


def doublet(spacing=0.5):
    return [CavityMode(637.0 - spacing, 4300.0, 20.0), CavityMode(637.0, 3800.0, 20.0)]


def oracle_wrapped_mean(tau, period):
    norm = -math.expm1(-period / tau)
    val, _ = quad(lambda t: t * math.exp(-t / tau) / (tau * norm), 0.0, period, limit=200)
    return val


def test_coupled_lifetime_examples():
    assert coupled_lifetime(NV1, 11.24) == pytest.approx(8.30, abs=5e-3)
    assert coupled_lifetime(NV1, 0.0) == 11.1
    assert coupled_lifetime(NV1, 1e9) < 1e-6 * 11.1
    with pytest.raises(ValueError):
        coupled_lifetime(NV1, -1.0)


@given(st.floats(0.0, 1e5), st.floats(1e-6, 1e3))
def test_coupled_lifetime_strictly_decreasing(f, df):
    assert coupled_lifetime(NV1, f + df) < coupled_lifetime(NV1, f)


def test_far_detuned_scan_gives_bulk_lifetime():
    far = 60 * 637.0 / 3800.0
    scan = lifetime_vs_detuning(NV1, doublet(), (4.0, 11.24), [far, -far - 0.5])
    assert np.allclose(scan.lifetime_ns, 11.1, rtol=5e-3)
    assert np.all(scan.sigma_ns == 0)
    assert scan.reference_mode_spacing_nm == pytest.approx(0.5)


def test_c2_resonance_gives_8p3():
    scan = lifetime_vs_detuning(NV1, doublet(), (4.0, 11.24), [0.0])
    # C1 sits 0.5 nm away and adds a small tail contribution
    assert scan.lifetime_ns[0] == pytest.approx(8.3, rel=0.01)
    alone = lifetime_vs_detuning(NV1, doublet()[1:], (11.24,), [0.0])
    assert alone.lifetime_ns[0] == pytest.approx(8.3, abs=5e-3)


def test_two_minima_separated_by_spacing():
    d = np.round(np.arange(-1.0, 1.5 + 1e-9, 0.001), 6)
    tau = lifetime_vs_detuning(NV1, doublet(), (4.0, 11.24), d).lifetime_ns
    interior = np.flatnonzero((tau[1:-1] < tau[:-2]) & (tau[1:-1] < tau[2:])) + 1
    assert interior.size == 2
    assert d[interior[1]] - d[interior[0]] == pytest.approx(0.5, abs=0.01)


def test_zero_spacing_equals_doubled_single_mode():
    d = np.linspace(-0.5, 0.5, 41)
    both = [CavityMode(637.0, 3800.0, 20.0), CavityMode(637.0, 3800.0, 20.0)]
    two = lifetime_vs_detuning(NV1, both, (5.0, 5.0), d).lifetime_ns
    one = lifetime_vs_detuning(NV1, both[:1], (10.0,), d).lifetime_ns
    np.testing.assert_allclose(two, one, rtol=1e-9)


def test_length_mismatch():
    with pytest.raises(ValueError):
        lifetime_vs_detuning(NV1, doublet(), (1.0,), [0.0])


def test_histogram_mle_within_one_percent():
    hist = simulate_histogram(11.1, 1_000_000, 0.2, 4.75, (0.0, 1.0), seed=3)
    mean = float(np.sum(hist.centers_ns * hist.counts) / hist.total)
    tau_hat = brentq(lambda t: oracle_wrapped_mean(t, PERIOD) - mean, 1.0, 50.0)
    assert abs(tau_hat / 11.1 - 1) < 0.01


def test_wrapped_mean_matches_integral_and_samples():
    for tau in (5.0, 11.1, 80.0, 400.0):
        assert wrapped_exponential_mean(tau, PERIOD) == pytest.approx(
            oracle_wrapped_mean(tau, PERIOD), rel=1e-10)
    # a lifetime comparable to the period makes the wrap matter
    tau = 150.0
    t = draw_arrival_times(tau, 1_000_000, 4.75, rng=11)
    assert t.min() >= 0 and t.max() < PERIOD
    se = t.std(ddof=1) / math.sqrt(t.size)
    assert abs(t.mean() - oracle_wrapped_mean(tau, PERIOD)) < 3 * se


def test_zero_photons_and_determinism():
    empty = simulate_histogram(11.1, 0, 0.2, seed=1)
    assert empty.total == 0 and empty.counts.size > 0
    a = simulate_histogram(11.1, 5000, 0.2, 4.75, (0.3, 1.0), seed=7)
    b = simulate_histogram(11.1, 5000, 0.2, 4.75, (0.3, 1.0), seed=7)
    c = simulate_histogram(11.1, 5000, 0.2, 4.75, (0.3, 1.0), seed=8)
    assert np.array_equal(a.counts, b.counts) and np.array_equal(a.bin_edges_ns, b.bin_edges_ns)
    assert not np.array_equal(a.counts, c.counts)


@given(st.floats(0.5, 100.0), st.integers(0, 3000), st.sampled_from([0.1, 0.2, 0.5, 1.0, 4.0]),
       st.floats(0.0, 0.9), st.integers(0, 2 ** 32 - 1))
def test_histogram_invariants(tau, n, width, frac, seed):
    h = simulate_histogram(tau, n, width, 4.75, (frac, 1.0), seed=seed)
    assert np.all(np.diff(h.bin_edges_ns) > 0)
    assert h.bin_edges_ns[-1] - h.bin_edges_ns[0] <= h.period_ns
    assert h.bin_edges_ns[-1] > h.period_ns - width - 1e-9
    assert np.all(h.counts >= 0) and h.total <= n


def test_simulator_rejects_bad_input():
    with pytest.raises(ValueError):
        simulate_histogram(-1.0, 10, 0.2)
    with pytest.raises(ValueError):
        simulate_histogram(11.1, 10, 0.2, contamination=(1.0, 1.0))
    with pytest.raises(ValueError):
        simulate_histogram(11.1, 10, 500.0)


def test_histogram_type_invariants():
    with pytest.raises(ValueError):
        Histogram(np.array([0.0, 1.0, 1.0]), np.array([1, 2]))
    with pytest.raises(ValueError):
        Histogram(np.array([0.0, 1.0, 2.0]), np.array([1, -2]))
    with pytest.raises(ValueError):
        Histogram(np.array([0.0, 1.0, 2.0]), np.array([1.5, 2]))
    with pytest.raises(ValueError):
        Histogram(np.array([0.0, 300.0]), np.array([1]))
    with pytest.raises(ValueError):
        DetuningScan(((0.0, -1.0, 0.0),))
    with pytest.raises(ValueError):
        DetuningScan(((math.inf, 1.0, 0.0),))


def test_expected_counts_integrates_exponential():
    edges = np.linspace(0.0, 50.0, 11)
    got = expected_counts(edges, 2.0, 7.0, 0.5)
    ref = [quad(lambda t: 2.0 * math.exp(-t / 7.0) + 0.5, a, b)[0]
           for a, b in zip(edges[:-1], edges[1:])]
    np.testing.assert_allclose(got, ref, rtol=1e-12)
