import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from purcellkit.core import CavityMode, CouplingGeometry, DecayModel, EmitterTransition
from purcellkit.purcell import (
    design_projection,
    enhanced_branching,
    f_cav,
    lorentzian_detuning,
    purcell_factor,
    purcell_from_lifetimes,
    total_enhancement,
)


def emitter(wl=637.0, eta=1.0, leak=1.0):
    return EmitterTransition(wl, 11.1, 0.03, leak_ratio=leak, geometry=CouplingGeometry(eta))


def test_f_cav_examples():
    assert f_cav(CavityMode(637.0, 4000.0, 17.0)) == pytest.approx(17.88, abs=5e-3)
    assert f_cav(CavityMode(637.0, 4000.0, 32.0)) == pytest.approx(9.50, abs=5e-3)
    assert f_cav(CavityMode(637.0, 1e-30, 17.0)) < 1e-30
    # exact prefactor 3 / (4 pi^2)
    assert f_cav(CavityMode(500.0, 4 * math.pi ** 2, 3.0)) == pytest.approx(1.0, rel=1e-15)


def test_lorentzian_examples():
    mode = CavityMode(637.0, 3800.0, 20.0)
    assert lorentzian_detuning(mode, 637.0) == 1.0
    half = 637.0 * (1 + 1 / (2 * 3800.0))
    assert lorentzian_detuning(mode, half) == pytest.approx(0.5, rel=1e-12)
    expected = 1 / (1 + 4 * 3800.0 ** 2 * (0.24 / 637.0) ** 2)
    assert lorentzian_detuning(mode, 637.24) == pytest.approx(expected, rel=1e-12)
    assert lorentzian_detuning(mode, 637.24) == pytest.approx(0.108, abs=1e-3)


def test_purcell_factor_examples():
    mode = CavityMode(637.0, 4000.0, 17.0)
    assert purcell_factor(mode, emitter()) == pytest.approx(17.88, abs=5e-3)
    assert purcell_factor(mode, emitter(eta=0.0)) == 0.0
    m2 = CavityMode(637.0, 3800.0, 23.0)
    on = purcell_factor(m2, emitter())
    off = purcell_factor(m2, emitter(637.0 * (1 + 1 / 7600)))
    assert off == pytest.approx(on / 2, rel=1e-12)
    assert purcell_factor(mode, emitter(eta=0.5)) == pytest.approx(f_cav(mode) / 4, rel=1e-15)


def test_total_enhancement_examples():
    c2 = CavityMode(637.0, 3800.0, 20.0)
    far = CavityMode(637.0 + 60 * 637.0 / 4300, 4300.0, 20.0)
    single = purcell_factor(c2, emitter())
    both = total_enhancement([c2, far], emitter())
    assert both.purcell_f == pytest.approx(single, rel=1e-3)
    assert both.purcell_f == pytest.approx(sum(f for _, f in both.per_mode_f), rel=1e-15)
    assert both.total_factor == pytest.approx(1.0 + both.purcell_f)
    empty = total_enhancement([], emitter(leak=1.7))
    assert empty.total_factor == 1.7 and empty.purcell_f == 0.0
    with pytest.raises(ValueError):
        total_enhancement([c2, far], emitter(), etas=[1.0])
    with pytest.raises(ValueError):
        total_enhancement([c2], emitter(), peak_f=[1.0, 2.0])


def test_total_enhancement_peak_f_matches_fit_model():
    from purcellkit.fit.detuning import two_mode_lifetime

    c1, c2 = CavityMode(636.5, 4300.0, 20.0), CavityMode(637.0, 3800.0, 20.0)
    e = emitter()
    for d in (-0.3, 0.0, 0.11, 0.5, 1.0):
        f = total_enhancement([c1.shifted(d), c2.shifted(d)], e, peak_f=[4.0, 11.24]).purcell_f
        tau = 11.1 / (1 + 0.03 * f)
        assert two_mode_lifetime(d, 11.1, 4.0, 11.24) == pytest.approx(tau, rel=1e-12)


def test_lifetime_inversion_examples():
    assert purcell_from_lifetimes(11.1, 8.3, 0.03) == pytest.approx(11.2449, abs=1e-4)
    assert purcell_from_lifetimes(7.0, 7.0, 0.4) == 0.0
    assert purcell_from_lifetimes(11.1, 10.4, 0.03) == pytest.approx(2.24, abs=5e-3)
    with pytest.raises(ValueError):
        purcell_from_lifetimes(8.3, 11.1, 0.03)
    with pytest.raises(ValueError):
        purcell_from_lifetimes(11.1, 11.1 * (1 + 1e-9), 0.03)
    assert purcell_from_lifetimes(1.625, 1.6250000000000002, 0.0625) == 0.0
    with pytest.raises(ValueError):
        purcell_from_lifetimes(11.1, 8.3, 1.0)


def test_branching_examples():
    assert enhanced_branching(0.03, 11.0) == pytest.approx(float(Fraction(36, 133)), abs=1e-15)
    assert enhanced_branching(0.2, 0.0) == pytest.approx(0.2, rel=1e-15)
    b = enhanced_branching(0.03, f_cav(CavityMode(637.0, 5e5, 17.0)))
    assert b > 0.98 and b == pytest.approx(0.986, abs=1e-3)


def test_design_projection_examples():
    assert design_projection(2e5, 2.0, 0.03) == pytest.approx(0.9958, abs=1e-4)
    assert design_projection(2e5, 2.0, 0.03) > 0.995
    assert design_projection(5e5, 17.0, 0.03) == pytest.approx(0.986, abs=1e-3)
    assert design_projection(1e-20, 5.0, 0.07) == pytest.approx(0.07, rel=1e-12)


q_values = st.floats(10.0, 1e6)


@given(q_values, q_values, st.floats(1.0, 50.0))
def test_monotone_in_q_on_resonance(q1, q2, v):
    if q1 == q2:
        return
    lo, hi = sorted((q1, q2))
    e = emitter()
    assert purcell_factor(CavityMode(637.0, lo, v), e) < purcell_factor(CavityMode(637.0, hi, v), e)


@given(st.floats(100.0, 1e5), st.floats(1.01, 10.0), st.floats(1.5, 20.0))
def test_decreasing_in_q_in_tail(q, factor, n_linewidths):
    # detuning fixed at n_linewidths of the lower-Q mode; raising Q narrows the line
    e = emitter(637.0 * (1 + n_linewidths / q))
    a = purcell_factor(CavityMode(637.0, q, 10.0), e)
    b = purcell_factor(CavityMode(637.0, q * factor, 10.0), e)
    assert b < a


@given(st.floats(600.0, 700.0), st.floats(-2.0, 2.0), st.floats(100.0, 1e5))
def test_lorentzian_symmetric_in_ratio(lam, delta, q):
    mode = CavityMode(lam, q, 10.0)
    mirror = lam * (2 - (lam + delta) / lam)
    assert lorentzian_detuning(mode, lam + delta) == pytest.approx(
        lorentzian_detuning(mode, mirror), rel=1e-6)
    assert 0 < lorentzian_detuning(mode, lam + delta) <= 1


@given(st.floats(0.001, 0.999), st.floats(0.0, 1e6), st.floats(1e-6, 1e3))
def test_branching_monotone_and_bounded(xi, f, df):
    b = enhanced_branching(xi, f)
    assert xi - 1e-15 <= b < 1
    assert enhanced_branching(xi, f + df) >= b


@given(st.floats(0.01, 0.99), st.floats(0.0, 100.0), st.floats(1e-3, 10.0))
def test_branching_strictly_increasing(xi, f, df):
    assert enhanced_branching(xi, f + df) > enhanced_branching(xi, f)


@given(st.floats(0.1, 100.0), st.floats(0.001, 0.999), st.floats(0.0, 1e4))
def test_consistency_loop(tau0, xi, f):
    t = EmitterTransition(637.0, tau0, xi)
    tau_c = DecayModel.from_transition(t, f).lifetime_ns
    back = purcell_from_lifetimes(tau0, tau_c, xi)
    assert back == pytest.approx(f, rel=1e-10, abs=1e-10)
