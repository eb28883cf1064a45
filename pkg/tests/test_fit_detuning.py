import numpy as np
import pytest

from purcellkit.core import CavityMode, EmitterTransition
from purcellkit.dynamics import DetuningScan, lifetime_vs_detuning
from purcellkit.fit import DegenerateScanError, fit_detuning_scan, two_mode_lifetime
from purcellkit.cli.reproduce import SCAN_DETUNINGS_NM, noisy_scan

NV1 = EmitterTransition(637.0, 11.1, 0.03)
DOUBLET = [CavityMode(636.5, 4300.0, 20.0), CavityMode(637.0, 3800.0, 20.0)]
TRUTH = {"tau0_ns": 11.1, "peak_f1": 4.0, "peak_f2": 11.24}


def test_model_matches_forward_simulator():
    d = np.linspace(-1.0, 1.5, 51)
    scan = lifetime_vs_detuning(NV1, DOUBLET, (4.0, 11.24), d)
    np.testing.assert_allclose(two_mode_lifetime(d, 11.1, 4.0, 11.24), scan.lifetime_ns,
                               rtol=1e-12)


@pytest.mark.parametrize("offset", [0.0, 0.037, -0.11])
def test_noiseless_recovery(offset):
    d = np.asarray(SCAN_DETUNINGS_NM)
    tau = two_mode_lifetime(d, 11.1, 4.0, 11.24, offset)
    rep = fit_detuning_scan(DetuningScan.from_arrays(d, tau, None, 0.5), q1=4300, q2=3800)
    assert rep.converged
    for k, v in TRUTH.items():
        assert rep.parameters[k] == pytest.approx(v, rel=1e-6)
    assert rep.parameters["center_offset_nm"] == pytest.approx(offset, abs=1e-8)


def test_small_instance_equivalence():
    d = [-0.4, -0.1, 0.0, 0.05, 0.3, 0.45, 0.5, 0.6, 1.0]
    scan = lifetime_vs_detuning(NV1, DOUBLET, (2.5, 7.0), d)
    rep = fit_detuning_scan(scan, q1=4300, q2=3800)
    assert rep.parameters["peak_f1"] == pytest.approx(2.5, rel=1e-6)
    assert rep.parameters["peak_f2"] == pytest.approx(7.0, rel=1e-6)


def test_noisy_fits_have_calibrated_sigmas():
    pulls = []
    for seed in range(20):
        rep = fit_detuning_scan(noisy_scan(seed), q1=4300, q2=3800)
        assert rep.converged
        assert abs(rep.parameters["tau0_ns"] / 11.1 - 1) <= 0.10
        pulls += [(rep.parameters[k] - v) / rep.sigmas[k] for k, v in TRUTH.items()]
    pulls = np.array(pulls)
    assert np.max(np.abs(pulls)) < 3.5
    assert 0.5 < np.mean(pulls ** 2) < 1.6


def test_single_mode_scan_gives_f2_consistent_with_zero():
    d = np.asarray(SCAN_DETUNINGS_NM)
    rng = np.random.default_rng(21)
    tau = two_mode_lifetime(d, 11.1, 9.0, 0.0)
    tau = tau * (1 + 0.02 * rng.standard_normal(d.size))
    rep = fit_detuning_scan(DetuningScan.from_arrays(d, tau, 0.02 * tau, 0.5),
                            q1=4300, q2=3800)
    assert abs(rep.parameters["peak_f2"]) <= 2 * rep.sigmas["peak_f2"]
    assert rep.parameters["peak_f1"] == pytest.approx(9.0, rel=0.3)


def test_degenerate_scans():
    with pytest.raises(DegenerateScanError):
        fit_detuning_scan(DetuningScan.from_arrays([0.1] * 8, [9.0] * 8, None, 0.5))
    with pytest.raises(DegenerateScanError):
        fit_detuning_scan(DetuningScan.from_arrays([0.0, 0.1, 0.2], [9.0, 9.5, 10.0], None, 0.5))


def test_float_q_recovers_q():
    d = np.round(np.concatenate([np.linspace(-0.3, 0.3, 25), 0.5 + np.linspace(-0.3, 0.3, 25)]), 6)
    tau = two_mode_lifetime(d, 11.1, 4.0, 11.24, q1=4000.0, q2=3500.0)
    rep = fit_detuning_scan(DetuningScan.from_arrays(d, tau, None, 0.5), q1=4300, q2=3800,
                            float_q=True)
    assert rep.parameters["q1"] == pytest.approx(4000.0, rel=1e-5)
    assert rep.parameters["q2"] == pytest.approx(3500.0, rel=1e-5)


def test_initial_override_is_used():
    d = np.asarray(SCAN_DETUNINGS_NM)
    tau = two_mode_lifetime(d, 11.1, 4.0, 11.24)
    rep = fit_detuning_scan(DetuningScan.from_arrays(d, tau, None, 0.5),
                            initial={"tau0_ns": 10.0, "peak_f1": 3.0, "peak_f2": 9.0})
    assert rep.parameters["peak_f2"] == pytest.approx(11.24, rel=1e-6)
