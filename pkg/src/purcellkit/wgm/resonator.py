"""Whispering-gallery resonances of a microring in the effective-index picture.

The membrane is first reduced to a slab with effective index ``n_eff(lambda)``;
the ring then becomes a 2D annulus of index ``n_eff`` surrounded by the
lateral cladding.  Inside the annulus the radial field is a combination of
J_m and Y_m, outside it decays as Y_m (the real part of the outgoing Hankel
function, which neglects radiation loss), and in the central hole it is the
regular J_m.

Ring TE modes (in-plane E, dominant H_z) use the continuity of H_z and
(1/eps) dH_z/dr; ring TM modes (dominant E_z) use E_z and dE_z/dr.  The
slab is solved in the matching polarisation.

When the inner edge of the ring sits deep inside the evanescent zone of a
mode (well inside the caustic ``m / (n_eff k)``) the hole cannot be felt and
the ring is solved as a disk of the outer radius.  Otherwise the full
two-interface problem is used.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from purcellkit.core import CavityMode, Polarization, RingGeometry, mode_volume_from_um3
from purcellkit.wgm.bessel import bessel_j, bessel_jjp, bessel_jy
from purcellkit.wgm.slab import decay_lengths_um, slab_profile, solve_slab

log = logging.getLogger(__name__)

DISK, RING = "disk", "ring"

GRID_STEP_NM = 0.05
ROOT_XTOL_NM = 1e-10
RESIDUAL_TOL = 1e-9
AIRY_MARGIN = 5.0


class GridTooCoarseError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class RadialField:
    """Radial field profile on the solver grid.

    The amplitude is rescaled on construction so that its peak |value| is 1.
    """

    radius_grid_um: np.ndarray
    amplitude: np.ndarray
    mode: CavityMode

    def __post_init__(self):
        r = np.asarray(self.radius_grid_um, dtype=float)
        a = np.asarray(self.amplitude, dtype=float)
        if r.shape != a.shape or r.ndim != 1:
            raise ValueError("radius grid and amplitude must be 1D arrays of equal length")
        if np.any(np.diff(r) <= 0):
            raise ValueError("radius grid must be strictly increasing")
        peak = np.max(np.abs(a)) if a.size else 0.0
        if not (np.isfinite(peak) and peak > 0):
            raise ValueError("amplitude must be finite and not identically zero")
        object.__setattr__(self, "radius_grid_um", r)
        object.__setattr__(self, "amplitude", a / peak)


def _n_eff(geometry, wavelengths_nm, polarization) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(wavelengths_nm, dtype=float))
    return np.array([solve_slab(geometry, float(x), polarization).effective_index for x in lam])


def _weights(n1, n2, polarization):
    if Polarization(polarization) is Polarization.TE:
        return 1.0 / n1 ** 2, 1.0 / n2 ** 2
    return np.ones_like(n1), 1.0


def _log_derivative_j(m, x):
    j, jp = bessel_jjp(m, x)
    return jp / j


def _log_derivative_y(m, x):
    _, _, y, yp = bessel_jy(m, x)
    return yp / y


def _disk_function(m, n1, n2, w1, w2, k, radius):
    a, b = n1 * k * radius, n2 * k * radius
    ja, jpa = bessel_jjp(m, a)
    with np.errstate(all="ignore"):
        t1 = w1 * n1 * jpa
        t2 = w2 * n2 * ja * _log_derivative_y(m, b)
        return (t1 - t2) / np.hypot(t1, t2)


def _ring_rows(m, n1, n2, w1, w2, k, r_in, r_out):
    a_in, b_in = n1 * k * r_in, n2 * k * r_in
    a_out, b_out = n1 * k * r_out, n2 * k * r_out
    j_ai, jp_ai, y_ai, yp_ai = bessel_jy(m, a_in)
    j_ao, jp_ao, y_ao, yp_ao = bessel_jy(m, a_out)
    with np.errstate(all="ignore"):
        ld_in = _log_derivative_j(m, b_in)
        ld_out = _log_derivative_y(m, b_out)
        row_in = np.array([w1 * n1 * jp_ai - w2 * n2 * j_ai * ld_in,
                           w1 * n1 * yp_ai - w2 * n2 * y_ai * ld_in])
        row_out = np.array([w1 * n1 * jp_ao - w2 * n2 * j_ao * ld_out,
                            w1 * n1 * yp_ao - w2 * n2 * y_ao * ld_out])
        row_in = row_in / np.hypot(*row_in)
        row_out = row_out / np.hypot(*row_out)
    return row_in, row_out


def _ring_function(m, n1, n2, w1, w2, k, r_in, r_out):
    row_in, row_out = _ring_rows(m, n1, n2, w1, w2, k, r_in, r_out)
    return row_in[0] * row_out[1] - row_in[1] * row_out[0]


def select_model(geometry: RingGeometry, m: int, wavelength_nm, n_eff) -> np.ndarray:
    """``True`` where the disk approximation applies.

    The inner edge must lie at least ``AIRY_MARGIN`` Airy lengths
    (m^(1/3) / (n_eff k)) inside the caustic ``m / (n_eff k)``; closer than
    that the hole shifts the resonance by more than the root tolerance.
    """
    k = 2 * math.pi / (np.asarray(wavelength_nm, dtype=float) * 1e-3)
    x_inner = np.asarray(n_eff) * k * geometry.inner_radius_um
    return x_inner < m - AIRY_MARGIN * m ** (1.0 / 3.0)


def characteristic(geometry: RingGeometry, m: int, wavelength_nm,
                   polarization: Polarization = Polarization.TE, model: str | None = None,
                   n_eff=None):
    """Normalised radial characteristic function; zero at a resonance.

    Values lie in [-1, 1].  ``model`` forces ``"disk"`` or ``"ring"``; by
    default it is picked per wavelength from the caustic radius.
    """
    lam = np.asarray(wavelength_nm, dtype=float)
    if n_eff is None:
        n_eff = _n_eff(geometry, lam, polarization).reshape(lam.shape)
    n1 = np.asarray(n_eff, dtype=float)
    n2 = geometry.cladding_index_top
    w1, w2 = _weights(n1, n2, polarization)
    k = 2 * math.pi / (lam * 1e-3)
    if model == DISK:
        return _disk_function(m, n1, n2, w1, w2, k, geometry.outer_radius_um)
    if model == RING:
        return _ring_function(m, n1, n2, w1, w2, k, geometry.inner_radius_um,
                              geometry.outer_radius_um)
    use_disk = select_model(geometry, m, lam, n1)
    disk = _disk_function(m, n1, n2, w1, w2, k, geometry.outer_radius_um)
    ring = _ring_function(m, n1, n2, w1, w2, k, geometry.inner_radius_um,
                          geometry.outer_radius_um)
    return np.where(use_disk, disk, ring)


def _bisect(f, lo, hi, f_lo):
    """Vectorised bisection of sign-changing brackets down to ROOT_XTOL_NM."""
    lo, hi, f_lo = lo.copy(), hi.copy(), f_lo.copy()
    while np.max(hi - lo) > ROOT_XTOL_NM:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def find_resonances(geometry: RingGeometry, band_nm: tuple[float, float],
                    polarization: Polarization = Polarization.TE, *,
                    quality_factor: float = 5000.0, azimuthal_range: tuple[int, int] | None = None,
                    step_nm: float = GRID_STEP_NM) -> list[CavityMode]:
    """All (m, p) resonances with wavelength inside ``band_nm``.

    Roots are bracketed by sign changes on a ``step_nm`` wavelength grid and
    refined by bisection.  Q is not computed here: every mode carries the
    supplied ``quality_factor``.  Mode volumes are traveling-wave values.
    """
    polarization = Polarization(polarization)
    lo_nm, hi_nm = map(float, band_nm)
    if not hi_nm > lo_nm:
        return []
    n_pts = int(math.ceil((hi_nm - lo_nm) / step_nm)) + 1
    lam = np.linspace(lo_nm, hi_nm, max(n_pts, 2))
    n_eff = _n_eff(geometry, lam, polarization)
    k = 2 * math.pi / (lam * 1e-3)
    n2 = geometry.cladding_index_top
    radius = geometry.outer_radius_um
    if azimuthal_range is None:
        m_lo = max(0, int(math.floor(n2 * k.min() * radius)))
        m_hi = int(math.ceil(n_eff.max() * k.max() * radius))
    else:
        m_lo, m_hi = azimuthal_range

    modes = []
    for m in range(m_lo, m_hi + 1):
        for lam_root in _roots_for_order(geometry, m, lam, n_eff, polarization):
            field = radial_field(geometry, m, lam_root, polarization)
            p = count_radial_order(field, geometry)
            provisional = CavityMode(lam_root, quality_factor, 1.0, polarization, m, p)
            field = RadialField(field.radius_grid_um, field.amplitude, provisional)
            volume = mode_volume(field, geometry)
            modes.append(CavityMode(lam_root, quality_factor, volume, polarization, m, p))
    modes.sort(key=lambda mode: mode.wavelength_nm)
    log.debug("found %d %s resonances in %s", len(modes), polarization.value, band_nm)
    return modes


def _roots_for_order(geometry, m, lam, n_eff, polarization) -> list[float]:
    n2 = geometry.cladding_index_top
    use_disk = select_model(geometry, m, lam, n_eff)
    roots = []
    for model, valid_disk in ((DISK, True), (RING, False)):
        valid = use_disk == valid_disk
        if not np.any(valid):
            continue
        f = characteristic(geometry, m, lam, polarization, model, n_eff)
        ok = np.isfinite(f[:-1]) & np.isfinite(f[1:]) & (valid[:-1] | valid[1:])
        exact = np.flatnonzero((f == 0) & valid)
        brackets = np.flatnonzero(ok & (f[:-1] * f[1:] < 0))
        candidates = list(lam[exact])
        if brackets.size:

            def g(x, model=model):
                return characteristic(geometry, m, x, polarization, model)

            candidates.extend(_bisect(g, lam[brackets], lam[brackets + 1], f[brackets]))
        for root in candidates:
            root = float(root)
            ne = _n_eff(geometry, root, polarization)[0]
            if bool(select_model(geometry, m, root, ne)) != valid_disk:
                continue
            k = 2 * math.pi / (root * 1e-3)
            if m <= n2 * k * geometry.outer_radius_um:
                continue  # exterior not evanescent: leaky, not a WGM
            residual = abs(float(characteristic(geometry, m, root, polarization, model)))
            if residual > RESIDUAL_TOL:
                continue  # sign flip across a discontinuity, not a root
            roots.append(root)
    return sorted(roots)


def radial_field(geometry: RingGeometry, m: int, wavelength_nm: float,
                 polarization: Polarization = Polarization.TE, *, points_per_um: int = 400
                 ) -> RadialField:
    """Radial profile of order ``m`` at (a resonance) ``wavelength_nm``.

    The grid has nodes exactly on the inner and outer ring edges.  The
    returned field carries a placeholder mode; callers attach the real one.
    """
    polarization = Polarization(polarization)
    n1 = _n_eff(geometry, wavelength_nm, polarization)[0]
    n2 = geometry.cladding_index_top
    w1, w2 = _weights(np.float64(n1), n2, polarization)
    k = 2 * math.pi / (wavelength_nm * 1e-3)
    r_in, r_out = geometry.inner_radius_um, geometry.outer_radius_um
    turning = m / (n2 * k)
    r_max = r_out + min(1.0, max(0.5 * (turning - r_out), 0.2))

    def seg(a, b):
        n = 2 * max(int(math.ceil((b - a) * points_per_um / 2)), 8)
        return np.linspace(a, b, n + 1)

    r_hole, r_ring, r_ext = seg(0.0, r_in), seg(r_in, r_out), seg(r_out, r_max)
    radius = np.concatenate([r_hole[:-1], r_ring, r_ext[1:]])
    _, _, y_ext, _ = bessel_jy(m, n2 * k * r_ext)

    if select_model(geometry, m, wavelength_nm, n1):
        core = bessel_j(m, n1 * k * np.concatenate([r_hole[:-1], r_ring]))
        ext = core[-1] * y_ext / y_ext[0]
        amp = np.concatenate([core, ext[1:]])
    else:
        row_in, row_out = _ring_rows(m, np.float64(n1), n2, w1, w2, k, r_in, r_out)
        # null vector of the 2x2 system from the row with the larger pivot
        row = row_out if np.max(np.abs(row_out)) >= np.max(np.abs(row_in)) else row_in
        j_r, _, y_r, _ = bessel_jy(m, n1 * k * r_ring)
        ring = row[1] * j_r - row[0] * y_r
        hole = ring[0] * bessel_j(m, n2 * k * r_hole) / bessel_j(m, n2 * k * r_in)
        ext = ring[-1] * y_ext / y_ext[0]
        amp = np.concatenate([hole[:-1], ring, ext[1:]])
    amp = amp / np.max(np.abs(amp))
    return RadialField(radius, amp, _placeholder(wavelength_nm, polarization, m))


def _placeholder(wavelength_nm, polarization, m) -> CavityMode:
    return CavityMode(float(wavelength_nm), 1.0, 1.0, polarization, m, 1)


def count_radial_order(field: RadialField, geometry: RingGeometry) -> int:
    """Number of field antinodes across the ring: sign changes + 1."""
    r = field.radius_grid_um
    inside = (r >= geometry.inner_radius_um) & (r <= geometry.outer_radius_um)
    a = field.amplitude[inside]
    a = a[np.abs(a) > 1e-12]
    return int(np.count_nonzero(np.diff(np.sign(a)) != 0)) + 1


def field_for_mode(geometry: RingGeometry, mode: CavityMode) -> RadialField:
    f = radial_field(geometry, mode.azimuthal_number, mode.wavelength_nm, mode.polarization)
    return RadialField(f.radius_grid_um, f.amplitude, mode)


# mode volume ---------------------------------------------------------------

def volume_integral(r_um, z_um, eps, intensity) -> float:
    """(2 pi int eps |E|^2 r dr dz) / max(eps |E|^2) on a rectangular (r, z) grid.

    ``eps`` and ``intensity`` are arrays of shape ``(len(r), len(z))`` (or
    broadcastable).  Trapezoid rule; no azimuthal dependence.
    """
    r = np.asarray(r_um, dtype=float)
    z = np.asarray(z_um, dtype=float)
    density = np.broadcast_to(np.asarray(eps, dtype=float) * np.asarray(intensity, dtype=float),
                              (r.size, z.size))
    inner = np.trapezoid(density, z, axis=1)
    return 2 * math.pi * float(np.trapezoid(inner * r, r)) / float(density.max())


def _halve(x: np.ndarray) -> np.ndarray:
    idx = np.arange(0, x.size, 2)
    if idx[-1] != x.size - 1:
        idx = np.append(idx, x.size - 1)
    return idx


def _segments(grid: np.ndarray, cuts) -> list[np.ndarray]:
    """Index arrays of the grid pieces between interface nodes (nodes shared)."""
    bounds = [0]
    for c in cuts:
        hits = np.flatnonzero(np.isclose(grid, c, rtol=0, atol=1e-12))
        if hits.size and 0 < hits[0] < grid.size - 1:
            bounds.append(int(hits[0]))
    bounds.append(grid.size - 1)
    return [np.arange(a, b + 1) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _piecewise_volume(r, psi2, z, zprof2, eps_of, halve=False) -> float:
    """Mode volume in um^3 with eps constant on every (r, z) block."""
    num = 0.0
    peak = 0.0
    for r_idx in _segments(r, eps_of.r_cuts):
        if halve:
            r_idx = r_idx[_halve(r_idx)]
        rr, pr = r[r_idx], psi2[r_idx]
        r_mid = 0.5 * (rr[0] + rr[-1])
        for z_idx in _segments(z, eps_of.z_cuts):
            if halve:
                z_idx = z_idx[_halve(z_idx)]
            zz, pz = z[z_idx], zprof2[z_idx]
            eps = eps_of(r_mid, 0.5 * (zz[0] + zz[-1]))
            dens = eps * np.outer(pr, pz)
            num += float(np.trapezoid(np.trapezoid(dens, zz, axis=1) * rr, rr))
            peak = max(peak, float(dens.max()))
    return 2 * math.pi * num / peak


class _RingPermittivity:
    def __init__(self, geometry: RingGeometry):
        self.g = geometry
        self.r_cuts = (geometry.inner_radius_um, geometry.outer_radius_um)
        self.z_cuts = (0.0, geometry.membrane_thickness_um)

    def __call__(self, r, z):
        g = self.g
        if z < 0:
            return g.cladding_index_bottom ** 2
        if z > g.membrane_thickness_um:
            return g.cladding_index_top ** 2
        if g.inner_radius_um < r < g.outer_radius_um:
            return g.core_index ** 2
        return g.cladding_index_top ** 2


def mode_volume(field: RadialField, geometry: RingGeometry, *, standing_wave: bool = False,
                z_points: int = 240, convergence_tol: float = 0.01) -> float:
    """V_mode of a ring mode in units of (lambda / n_core)^3.

    The radial profile is extended vertically with the slab profile of the
    same polarisation.  By default the traveling-wave volume is returned; a
    standing wave (cos^2 m phi) has the same peak and half the integral, so
    ``standing_wave=True`` halves it.

    Raises
    ------
    GridTooCoarseError
        If the half-resolution grid changes the result by more than
        ``convergence_tol``.
    """
    mode = field.mode
    slab = solve_slab(geometry, mode.wavelength_nm, mode.polarization)
    d_bottom, d_top = decay_lengths_um(slab, geometry)
    t = geometry.membrane_thickness_um
    n_seg = 2 * max(z_points // 6, 4)
    z = np.concatenate([np.linspace(-8 * d_bottom, 0.0, n_seg + 1)[:-1],
                        np.linspace(0.0, t, n_seg + 1),
                        np.linspace(t, t + 8 * d_top, n_seg + 1)[1:]])
    zprof2 = slab_profile(slab, geometry, z) ** 2
    psi2 = field.amplitude ** 2
    eps_of = _RingPermittivity(geometry)
    full = _piecewise_volume(field.radius_grid_um, psi2, z, zprof2, eps_of)
    half = _piecewise_volume(field.radius_grid_um, psi2, z, zprof2, eps_of, halve=True)
    if abs(full - half) > convergence_tol * abs(full):
        raise GridTooCoarseError(
            f"mode volume changed by {abs(full - half) / full:.2%} between grid resolutions")
    volume = mode_volume_from_um3(full, mode.wavelength_nm, geometry.core_index)
    return volume / 2 if standing_wave else volume
