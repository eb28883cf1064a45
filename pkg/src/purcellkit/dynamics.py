"""Forward model: cavity-modified lifetimes, detuning scans and photon-count histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from purcellkit.core import CavityMode, DecayModel, EmitterTransition
from purcellkit.purcell import total_enhancement

# Pulse repetition rate of the lifetime measurements, in MHz.
DEFAULT_REPETITION_RATE_MHZ = 4.75


@dataclass(frozen=True, eq=False)
class Histogram:
    """Photon arrival-time histogram, time measured from the excitation pulse."""

    bin_edges_ns: np.ndarray
    counts: np.ndarray
    repetition_rate_mhz: float = DEFAULT_REPETITION_RATE_MHZ

    def __post_init__(self):
        edges = np.asarray(self.bin_edges_ns, dtype=float)
        counts = np.asarray(self.counts)
        if edges.ndim != 1 or counts.shape != (edges.size - 1,):
            raise ValueError("need len(counts) == len(bin_edges_ns) - 1")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if counts.size and (np.any(counts < 0) or not np.all(np.equal(np.mod(counts, 1), 0))):
            raise ValueError("counts must be non-negative integers")
        if not self.repetition_rate_mhz > 0:
            raise ValueError("repetition rate must be > 0")
        if edges[-1] - edges[0] > self.period_ns * (1 + 1e-9):
            raise ValueError(
                f"histogram spans {edges[-1] - edges[0]} ns, more than the "
                f"{self.period_ns} ns repetition period")
        object.__setattr__(self, "bin_edges_ns", edges)
        object.__setattr__(self, "counts", counts.astype(np.int64))

    @property
    def period_ns(self) -> float:
        return 1000.0 / self.repetition_rate_mhz

    @property
    def centers_ns(self) -> np.ndarray:
        return 0.5 * (self.bin_edges_ns[1:] + self.bin_edges_ns[:-1])

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class DetuningScan:
    """Lifetime versus cavity detuning.

    ``detuning_nm`` is the shift applied to the whole mode comb, defined as
    lambda(reference mode) - lambda(emitter); ``reference_mode_spacing_nm`` is
    lambda(C2) - lambda(C1).
    """

    points: tuple[tuple[float, float, float], ...]
    reference_mode_spacing_nm: float = 0.0

    def __post_init__(self):
        pts = tuple((float(d), float(t), float(s)) for d, t, s in self.points)
        for d, t, s in pts:
            if not math.isfinite(d):
                raise ValueError("detunings must be finite")
            if not t > 0:
                raise ValueError(f"lifetimes must be > 0, got {t}")
            if not s >= 0:
                raise ValueError(f"sigmas must be >= 0, got {s}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_arrays(cls, detuning_nm, lifetime_ns, sigma_ns=None, reference_mode_spacing_nm=0.0):
        d = np.asarray(detuning_nm, dtype=float)
        t = np.asarray(lifetime_ns, dtype=float)
        s = np.zeros_like(d) if sigma_ns is None else np.broadcast_to(sigma_ns, d.shape)
        return cls(tuple(zip(d.tolist(), t.tolist(), np.asarray(s, dtype=float).tolist())),
                   reference_mode_spacing_nm)

    @property
    def detuning_nm(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def lifetime_ns(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    @property
    def sigma_ns(self) -> np.ndarray:
        return np.array([p[2] for p in self.points])


def coupled_lifetime(emitter: EmitterTransition, f: float) -> float:
    """Lifetime when only the ZPL rate is multiplied by ``1 + f``."""
    if not f >= 0:
        raise ValueError(f"Purcell factor must be >= 0, got {f!r}")
    return DecayModel.from_transition(emitter, f).lifetime_ns


def lifetime_vs_detuning(emitter: EmitterTransition, modes: Sequence[CavityMode],
                         peak_f: Sequence[float], detunings_nm: Sequence[float]) -> DetuningScan:
    """Lifetime as the mode comb is shifted rigidly past a fixed emitter.

    Each value in ``detunings_nm`` is added to every mode wavelength; the
    total F at that shift is the Lorentzian-weighted sum of ``peak_f``.
    """
    modes = list(modes)
    if len(peak_f) != len(modes):
        raise ValueError(f"got {len(peak_f)} peak F values for {len(modes)} modes")
    points = []
    for d in detunings_nm:
        shifted = [m.shifted(float(d)) for m in modes]
        f = total_enhancement(shifted, emitter, peak_f=peak_f).purcell_f
        points.append((float(d), coupled_lifetime(emitter, f), 0.0))
    spacing = modes[-1].wavelength_nm - modes[0].wavelength_nm if len(modes) > 1 else 0.0
    return DetuningScan(tuple(points), spacing)


def make_rng(seed: int) -> np.random.Generator:
    """The package's only random source: numpy's PCG64 seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))


def draw_arrival_times(true_lifetime_ns: float, n_photons: int, repetition_rate_mhz: float,
                       contamination: tuple[float, float] = (0.0, 1.0),
                       rng: np.random.Generator | int = 0) -> np.ndarray:
    """Photon delays after the last pulse, wrapped into one repetition period.

    A fraction ``contamination[0]`` of photons comes from a fast component
    with lifetime ``contamination[1]``.
    """
    frac, tau_c = contamination
    if not true_lifetime_ns > 0:
        raise ValueError("true lifetime must be > 0")
    if not 0 <= frac < 1:
        raise ValueError(f"contamination fraction must lie in [0, 1), got {frac!r}")
    if frac > 0 and not tau_c > 0:
        raise ValueError("contamination lifetime must be > 0")
    if isinstance(rng, (int, np.integer)):
        rng = make_rng(int(rng))
    period = 1000.0 / repetition_rate_mhz
    fast = rng.random(n_photons) < frac
    tau = np.where(fast, tau_c, true_lifetime_ns)
    return np.mod(rng.standard_exponential(n_photons) * tau, period)


def simulate_histogram(true_lifetime_ns: float, n_photons: int, bin_width_ns: float,
                       repetition_rate_mhz: float = DEFAULT_REPETITION_RATE_MHZ,
                       contamination: tuple[float, float] = (0.0, 1.0),
                       seed: int = 0) -> Histogram:
    """Binned TCSPC histogram of a (contaminated) single-exponential decay.

    The histogram covers as many whole bins as fit in one repetition period;
    photons landing in the leftover sliver at the end of the period (shorter
    than one bin) are not recorded.
    """
    period = 1000.0 / repetition_rate_mhz
    if not 0 < bin_width_ns <= period:
        raise ValueError(f"bin width must lie in (0, {period}] ns, got {bin_width_ns!r}")
    n_bins = int(math.floor(period / bin_width_ns + 1e-9))
    edges = np.arange(n_bins + 1) * bin_width_ns
    times = draw_arrival_times(true_lifetime_ns, n_photons, repetition_rate_mhz,
                               contamination, make_rng(seed))
    counts, _ = np.histogram(times, bins=edges)
    return Histogram(edges, counts, repetition_rate_mhz)


def wrapped_exponential_mean(tau_ns: float, period_ns: float) -> float:
    """Mean of an exponential delay folded into [0, period)."""
    return tau_ns - period_ns / math.expm1(period_ns / tau_ns)


def expected_counts(hist_edges_ns, amplitude: float, tau_ns: float, offset: float = 0.0):
    """Exact bin integrals of ``amplitude * exp(-t / tau) + offset`` per unit time."""
    edges = np.asarray(hist_edges_ns, dtype=float)
    a, b = edges[:-1], edges[1:]
    return amplitude * tau_ns * (np.exp(-a / tau_ns) - np.exp(-b / tau_ns)) + offset * (b - a)
