"""Purcell enhancement of a dipole transition coupled to cavity modes.

For one mode the enhancement of the emission rate, relative to the bulk
dielectric, is ``leak_ratio + F`` with

    F = F_cav * eta^2 / (1 + 4 Q^2 (lambda_i / lambda_cav - 1)^2)
    F_cav = 3 / (4 pi^2) * (lambda_cav / n)^3 * Q / V_mode

Several modes add their F independently.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

from purcellkit.core import CavityMode, EmitterTransition

EPS = sys.float_info.epsilon
PREFACTOR = 3.0 / (4.0 * math.pi ** 2)


@dataclass(frozen=True)
class EnhancementResult:
    """``total_factor = leak_ratio + purcell_f``; ``per_mode_f`` keyed by mode id."""

    purcell_f: float
    total_factor: float
    per_mode_f: list[tuple[str, float]] = field(default_factory=list)


def mode_id(mode: CavityMode) -> str:
    return (f"{mode.polarization.value}_m{mode.azimuthal_number}_p{mode.radial_number}"
            f"@{mode.wavelength_nm:.4f}")


def f_cav(mode: CavityMode) -> float:
    """Ideal (on-resonance, perfectly aligned) Purcell factor of ``mode``."""
    return PREFACTOR * mode.quality_factor / mode.mode_volume_cubic_lambda_over_n


def lorentzian_detuning(mode: CavityMode, emitter_wavelength_nm: float) -> float:
    """Spectral overlap factor, 1 on resonance and 1/2 at lambda_i/lambda_cav - 1 = 1/(2Q)."""
    if not emitter_wavelength_nm > 0:
        raise ValueError("emitter wavelength must be > 0")
    delta = emitter_wavelength_nm / mode.wavelength_nm - 1.0
    return 1.0 / (1.0 + 4.0 * mode.quality_factor ** 2 * delta ** 2)


def purcell_factor(mode: CavityMode, emitter: EmitterTransition,
                   eta: float | None = None) -> float:
    if eta is None:
        eta = emitter.geometry.overlap_eta
    return f_cav(mode) * eta ** 2 * lorentzian_detuning(mode, emitter.wavelength_nm)


def total_enhancement(modes: Sequence[CavityMode], emitter: EmitterTransition,
                      etas: Sequence[float] | None = None,
                      peak_f: Sequence[float] | None = None) -> EnhancementResult:
    """Sum of single-mode Purcell factors.

    Each mode contributes either ``f_cav * eta^2 * L`` (``etas``, defaulting to
    the emitter's own overlap for every mode) or, when ``peak_f`` is given,
    ``peak_f * L`` with an on-resonance value taken directly from a fit.
    """
    modes = list(modes)
    if etas is not None and len(etas) != len(modes):
        raise ValueError(f"got {len(etas)} overlap values for {len(modes)} modes")
    if peak_f is not None and len(peak_f) != len(modes):
        raise ValueError(f"got {len(peak_f)} peak F values for {len(modes)} modes")
    per_mode = []
    for i, mode in enumerate(modes):
        if peak_f is not None:
            f = peak_f[i] * lorentzian_detuning(mode, emitter.wavelength_nm)
        else:
            f = purcell_factor(mode, emitter, None if etas is None else etas[i])
        per_mode.append((mode_id(mode), f))
    total = math.fsum(f for _, f in per_mode)
    return EnhancementResult(total, emitter.leak_ratio + total, per_mode)


def purcell_from_lifetimes(tau0_ns: float, tau_coupled_ns: float, xi_zpl: float) -> float:
    """Purcell factor implied by a lifetime shortening of a ZPL fraction ``xi_zpl``.

    Raises ValueError if the coupled lifetime is longer than the bulk one.
    """
    if not 0 < xi_zpl < 1:
        raise ValueError(f"xi_zpl must lie in (0, 1), got {xi_zpl!r}")
    if not tau_coupled_ns > 0:
        raise ValueError("coupled lifetime must be > 0")
    ratio = tau0_ns / tau_coupled_ns
    if ratio < 1.0 - 8 * EPS:
        raise ValueError(
            f"coupled lifetime {tau_coupled_ns} ns exceeds bulk lifetime {tau0_ns} ns "
            "(negative Purcell factor)")
    # a ratio a few ulps below 1 is rounding noise from an unshifted lifetime
    return max(ratio - 1.0, 0.0) / xi_zpl


def enhanced_branching(xi_zpl: float, f: float) -> float:
    """ZPL branching ratio after the ZPL rate is multiplied by ``1 + f``."""
    zpl = (1.0 + f) * xi_zpl
    return zpl / (zpl + (1.0 - xi_zpl))


def design_projection(q: float, v: float, xi_zpl: float) -> float:
    """Branching ratio reachable with an ideally coupled, resonant (Q, V) cavity."""
    if not (q > 0 and v > 0):
        raise ValueError("q and v must be > 0")
    # F_cav does not depend on the wavelength once V is in (lambda/n)^3 units
    ideal = CavityMode(wavelength_nm=637.0, quality_factor=q, mode_volume_cubic_lambda_over_n=v)
    return enhanced_branching(xi_zpl, f_cav(ideal))
