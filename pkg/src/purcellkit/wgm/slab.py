"""Three-layer slab waveguide: the vertical half of the effective-index method."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from purcellkit.core import NoGuidedModeError, Polarization, RingGeometry


@dataclass(frozen=True)
class SlabSolution:
    effective_index: float
    polarization: Polarization
    slab_order: int = 0
    wavelength_nm: float = float("nan")


def _weights(geometry: RingGeometry, polarization: Polarization) -> tuple[float, float]:
    if Polarization(polarization) is Polarization.TE:
        return 1.0, 1.0
    n1 = geometry.core_index
    return (n1 / geometry.cladding_index_top) ** 2, (n1 / geometry.cladding_index_bottom) ** 2


def dispersion_residual(n_eff, geometry: RingGeometry, wavelength_nm: float,
                        polarization: Polarization, order: int = 0):
    """Transverse resonance condition in phase form (radians).

    ``kappa t - atan(rho_c gamma_c / kappa) - atan(rho_s gamma_s / kappa) - order pi``

    with rho = 1 for TE and (n_core / n_clad)^2 for TM.  Strictly decreasing in
    ``n_eff`` and free of poles, which makes bracketing trivial.
    """
    k0 = 2 * math.pi / (wavelength_nm * 1e-3)
    n1 = geometry.core_index
    nc, ns = geometry.cladding_index_top, geometry.cladding_index_bottom
    rho_c, rho_s = _weights(geometry, polarization)
    n_eff = np.asarray(n_eff, dtype=float)
    kappa = k0 * np.sqrt(n1 ** 2 - n_eff ** 2)
    gamma_c = k0 * np.sqrt(np.maximum(n_eff ** 2 - nc ** 2, 0.0))
    gamma_s = k0 * np.sqrt(np.maximum(n_eff ** 2 - ns ** 2, 0.0))
    with np.errstate(divide="ignore"):
        phase = (kappa * geometry.membrane_thickness_um
                 - np.arctan2(rho_c * gamma_c, kappa) - np.arctan2(rho_s * gamma_s, kappa))
    return phase - order * math.pi


def solve_slab(geometry: RingGeometry, wavelength_nm: float,
               polarization: Polarization = Polarization.TE, order: int = 0) -> SlabSolution:
    """Guided slab mode of the membrane at ``wavelength_nm``.

    Raises
    ------
    NoGuidedModeError
        If the requested order is below cutoff (always the case when the core
        does not exceed the claddings).
    """
    if not wavelength_nm > 0:
        raise ValueError(f"wavelength_nm must be > 0, got {wavelength_nm!r}")
    polarization = Polarization(polarization)
    n1 = geometry.core_index
    n_lo = max(geometry.cladding_index_top, geometry.cladding_index_bottom)
    if n1 <= n_lo:
        raise NoGuidedModeError("core index does not exceed the cladding index")
    span = n1 - n_lo
    lo, hi = n_lo + 1e-14 * span, n1 - 1e-14 * span

    def f(n):
        return float(dispersion_residual(n, geometry, wavelength_nm, polarization, order))

    if f(lo) <= 0:
        raise NoGuidedModeError(
            f"slab order {order} ({polarization.value}) is below cutoff at {wavelength_nm} nm")
    n_eff = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return SlabSolution(float(n_eff), polarization, order, float(wavelength_nm))


def slab_profile(solution: SlabSolution, geometry: RingGeometry, z_um) -> np.ndarray:
    """Transverse field of the slab mode, z = 0 at the bottom interface.

    Normalised to a peak of 1 in the core.
    """
    z = np.asarray(z_um, dtype=float)
    k0 = 2 * math.pi / (solution.wavelength_nm * 1e-3)
    n1, ne = geometry.core_index, solution.effective_index
    t = geometry.membrane_thickness_um
    kappa = k0 * math.sqrt(n1 ** 2 - ne ** 2)
    gamma_c = k0 * math.sqrt(ne ** 2 - geometry.cladding_index_top ** 2)
    gamma_s = k0 * math.sqrt(ne ** 2 - geometry.cladding_index_bottom ** 2)
    rho_s = _weights(geometry, solution.polarization)[1]
    phi_s = math.atan2(rho_s * gamma_s, kappa)
    core = np.cos(kappa * z - phi_s)
    below = math.cos(phi_s) * np.exp(gamma_s * np.minimum(z, 0.0))
    above = math.cos(kappa * t - phi_s) * np.exp(-gamma_c * np.maximum(z - t, 0.0))
    # kappa t = phi_s + phi_c + order pi >= phi_s, so |cos| reaches 1 inside the core
    return np.where(z < 0, below, np.where(z > t, above, core))


def decay_lengths_um(solution: SlabSolution, geometry: RingGeometry) -> tuple[float, float]:
    """1/e field decay lengths into the bottom and top claddings."""
    k0 = 2 * math.pi / (solution.wavelength_nm * 1e-3)
    ne = solution.effective_index
    return (1.0 / (k0 * math.sqrt(ne ** 2 - geometry.cladding_index_bottom ** 2)),
            1.0 / (k0 * math.sqrt(ne ** 2 - geometry.cladding_index_top ** 2)))
