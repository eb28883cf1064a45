"""Synthetic photoluminescence spectra, cavity tuning maps and peak finding.

Spectra are ``(N, 2)`` arrays of ``(wavelength_nm, intensity)`` on a uniform
grid.  All lineshapes are Lorentzian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.signal

from purcellkit.core import CavityMode, CouplingGeometry, EmitterTransition
from purcellkit.purcell import total_enhancement


@dataclass(frozen=True)
class SpectralLine:
    """An emitter line.  ``overlap_eta`` > 0 lets it couple to the cavity in tuning maps."""

    center_nm: float
    fwhm_nm: float
    amplitude: float
    overlap_eta: float = 0.0
    zpl_branching_ratio: float = 0.03

    def __post_init__(self):
        if not (math.isfinite(self.center_nm) and self.center_nm > 0):
            raise ValueError(f"line center must be > 0, got {self.center_nm!r}")
        if not self.fwhm_nm > 0:
            raise ValueError(f"line fwhm must be > 0, got {self.fwhm_nm!r}")
        if not self.amplitude >= 0:
            raise ValueError(f"line amplitude must be >= 0, got {self.amplitude!r}")
        if not 0 <= self.overlap_eta <= 1:
            raise ValueError(f"overlap_eta must lie in [0, 1], got {self.overlap_eta!r}")


@dataclass(frozen=True)
class CavityPeak:
    mode: CavityMode
    amplitude: float

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise ValueError(f"cavity amplitude must be >= 0, got {self.amplitude!r}")


@dataclass(frozen=True)
class SpectrumConfig:
    """Everything needed to draw one spectrum.

    ``sideband`` holds the knots ``(wavelength_nm, level)`` of a piecewise
    linear background, zero outside the outermost knots.  With no knots the
    cavity peaks are drawn on a unit envelope and no background is added.
    ``wavelength_grid_nm`` is ``(start, stop, step)`` with ``stop`` included.
    """

    lines: tuple[SpectralLine, ...] = ()
    cavity_modes: tuple[CavityPeak, ...] = ()
    sideband: tuple[tuple[float, float], ...] = ()
    wavelength_grid_nm: tuple[float, float, float] = (630.0, 645.0, 0.005)

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(
            ln if isinstance(ln, SpectralLine) else SpectralLine(*ln) for ln in self.lines))
        object.__setattr__(self, "cavity_modes", tuple(
            cp if isinstance(cp, CavityPeak) else CavityPeak(*cp) for cp in self.cavity_modes))
        knots = tuple((float(w), float(v)) for w, v in self.sideband)
        if any(v < 0 for _, v in knots):
            raise ValueError("sideband levels must be >= 0")
        if any(b[0] <= a[0] for a, b in zip(knots, knots[1:])):
            raise ValueError("sideband knots must have increasing wavelengths")
        object.__setattr__(self, "sideband", knots)
        start, stop, step = (float(v) for v in self.wavelength_grid_nm)
        if not step > 0:
            raise ValueError(f"grid step must be > 0, got {step!r}")
        if not stop >= start:
            raise ValueError("grid stop must not precede start")
        object.__setattr__(self, "wavelength_grid_nm", (start, stop, step))

    def grid(self) -> np.ndarray:
        start, stop, step = self.wavelength_grid_nm
        n = int(round((stop - start) / step)) + 1
        return start + step * np.arange(n)


def lorentzian(x, center: float, fwhm: float) -> np.ndarray:
    """Unit-height Lorentzian."""
    u = 2.0 * (np.asarray(x, dtype=float) - center) / fwhm
    return 1.0 / (1.0 + u * u)


def _envelope(config: SpectrumConfig, wl: np.ndarray) -> np.ndarray | None:
    if not config.sideband:
        return None
    w, v = zip(*config.sideband)
    return np.interp(wl, w, v, left=0.0, right=0.0)


def synthesize(config: SpectrumConfig, line_gain: Sequence[float] | None = None) -> np.ndarray:
    """Spectrum of ``config`` as an ``(N, 2)`` array.

    ``line_gain`` optionally scales each emitter line (used by
    :func:`tuning_map`).
    """
    wl = config.grid()
    intensity = np.zeros_like(wl)
    gains = [1.0] * len(config.lines) if line_gain is None else list(line_gain)
    for line, gain in zip(config.lines, gains):
        intensity += gain * line.amplitude * lorentzian(wl, line.center_nm, line.fwhm_nm)
    env = _envelope(config, wl)
    cavity = np.zeros_like(wl)
    for peak in config.cavity_modes:
        cavity += peak.amplitude * lorentzian(wl, peak.mode.wavelength_nm, peak.mode.linewidth_nm)
    if env is None:
        intensity += cavity
    else:
        intensity += env * cavity + env
    return np.column_stack([wl, intensity])


def line_enhancement(line: SpectralLine, modes: Sequence[CavityMode]) -> float:
    """leak + F for a line sitting in the given cavity modes."""
    emitter = EmitterTransition(line.center_nm, 1.0, line.zpl_branching_ratio,
                                geometry=CouplingGeometry(line.overlap_eta))
    return total_enhancement(modes, emitter).total_factor


def tuning_map(config: SpectrumConfig, shifts_nm: Sequence[float]) -> np.ndarray:
    """Spectra as the cavity modes are shifted rigidly; one row per shift.

    Each line is scaled by its total enhancement factor (``leak + F``, the
    factor on its ZPL emission rate) at that shift.  Changes in collection
    efficiency are ignored, so the map is qualitative.
    """
    rows = []
    for shift in shifts_nm:
        if not math.isfinite(shift):
            raise ValueError("shifts must be finite")
        moved = tuple(CavityPeak(cp.mode.shifted(float(shift)), cp.amplitude)
                      for cp in config.cavity_modes)
        shifted = SpectrumConfig(config.lines, moved, config.sideband, config.wavelength_grid_nm)
        modes = [cp.mode for cp in moved]
        gains = [line_enhancement(ln, modes) if ln.overlap_eta > 0 else 1.0
                 for ln in config.lines]
        rows.append(synthesize(shifted, gains)[:, 1])
    if not rows:
        return np.zeros((0, config.grid().size))
    return np.vstack(rows)


@dataclass(frozen=True)
class Peak:
    center_nm: float
    fwhm_nm: float
    q_estimate: float


def find_peaks(spectrum, min_prominence: float) -> list[Peak]:
    """Local maxima standing out by at least ``min_prominence``.

    The centre is the vertex of a parabola through the top three samples;
    the FWHM comes from linearly interpolated crossings at half the peak's
    prominence, and ``q_estimate = center / fwhm``.
    """
    data = np.asarray(spectrum, dtype=float)
    wl, y = data[:, 0], data[:, 1]
    if wl.size < 3:
        return []
    step = (wl[-1] - wl[0]) / (wl.size - 1)
    idx, _ = scipy.signal.find_peaks(y, prominence=min_prominence)
    if idx.size == 0:
        return []
    widths = scipy.signal.peak_widths(y, idx, rel_height=0.5)[0] * step
    peaks = []
    for i, width in zip(idx, widths):
        center = wl[i]
        if 0 < i < wl.size - 1:
            a, b, c = y[i - 1], y[i], y[i + 1]
            denom = a - 2 * b + c
            if denom != 0:
                center += 0.5 * step * (a - c) / denom
        peaks.append(Peak(float(center), float(width), float(center / width)))
    return peaks
