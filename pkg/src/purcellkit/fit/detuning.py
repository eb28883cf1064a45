"""Two-mode Lorentzian fit of lifetime versus cavity detuning."""

from __future__ import annotations

import numpy as np

from purcellkit.dynamics import DetuningScan
from purcellkit.fit.lsq import FitReport, minimize

PARAMETER_NAMES = ("tau0_ns", "peak_f1", "peak_f2", "center_offset_nm")


class DegenerateScanError(ValueError):
    """The scan cannot constrain the model (e.g. every detuning is the same)."""


def _lorentz(cavity_nm, emitter_nm, q):
    delta = emitter_nm / cavity_nm - 1.0
    return 1.0 / (1.0 + 4.0 * q * q * delta * delta)


def two_mode_lifetime(detuning_nm, tau0_ns: float, peak_f1: float, peak_f2: float,
                      center_offset_nm: float = 0.0, *, q1: float = 4300.0,
                      q2: float = 3800.0, mode_spacing_nm: float = 0.5,
                      xi_zpl: float = 0.03, emitter_wavelength_nm: float = 637.0):
    """Lifetime of an emitter coupled to the doublet (C1, C2) at each detuning.

    At scan coordinate ``d`` the modes sit at
    ``lambda_C2 = emitter + d - center_offset`` and
    ``lambda_C1 = lambda_C2 - mode_spacing``, so with zero offset ``d`` is
    lambda_C2 - lambda_emitter, the convention of
    :func:`purcellkit.dynamics.lifetime_vs_detuning` with modes ``[C1, C2]``.
    """
    d = np.asarray(detuning_nm, dtype=float)
    c2 = emitter_wavelength_nm + d - center_offset_nm
    c1 = c2 - mode_spacing_nm
    f = (peak_f1 * _lorentz(c1, emitter_wavelength_nm, q1)
         + peak_f2 * _lorentz(c2, emitter_wavelength_nm, q2))
    return tau0_ns / (1.0 + xi_zpl * f)


def _initial_guess(d, tau, w, model_kwargs):
    """Scan the offset; at each trial solve 1/tau = a + b1 L1 + b2 L2 linearly."""
    lw = model_kwargs["emitter_wavelength_nm"] / max(model_kwargs["q1"], model_kwargs["q2"])
    lo, hi = model_kwargs["offset_bounds"]
    lo = max(lo, d.min() - abs(model_kwargs["mode_spacing_nm"]) - 10 * lw)
    hi = min(hi, d.max() + 10 * lw)
    grid = np.arange(lo, hi + lw / 8, lw / 8)
    model_kwargs = {k: v for k, v in model_kwargs.items() if k != "offset_bounds"}
    rate = 1.0 / tau
    best = None
    for off in grid:
        l1 = two_mode_lifetime(d, 1.0, 1.0, 0.0, off, **{**model_kwargs, "xi_zpl": 1.0})
        l2 = two_mode_lifetime(d, 1.0, 0.0, 1.0, off, **{**model_kwargs, "xi_zpl": 1.0})
        design = np.column_stack([np.ones_like(d), 1.0 / l1 - 1.0, 1.0 / l2 - 1.0])
        coef, *_ = np.linalg.lstsq(design * w[:, None], rate * w, rcond=None)
        coef[1:] = np.maximum(coef[1:], 0.0)
        if coef[0] <= 0:
            continue
        resid = float(np.sum(((design @ coef - rate) * w) ** 2))
        if best is None or resid < best[0]:
            best = (resid, off, coef)
    if best is None:
        return [float(np.max(tau)), 1.0, 1.0, 0.0]
    _, off, (a, b1, b2) = best
    xi = model_kwargs["xi_zpl"]
    return [1.0 / a, b1 / (a * xi), b2 / (a * xi), float(off)]


def fit_detuning_scan(scan: DetuningScan, *, q1: float = 4300.0, q2: float = 3800.0,
                      mode_spacing_nm: float | None = None, xi_zpl: float = 0.03,
                      emitter_wavelength_nm: float = 637.0,
                      initial: dict[str, float] | None = None,
                      float_q: bool = False) -> FitReport:
    """Fit tau0, the two peak Purcell factors and the scan offset.

    Q1 and Q2 are held at their spectroscopic values unless ``float_q`` is
    set, in which case they join the free parameters as ``q1`` and ``q2``.
    ``mode_spacing_nm`` defaults to the scan's own C1-C2 spacing. The offset
    is confined to half a spacing either side of zero; a larger shift would
    just swap which dip is called C1 and which C2. Points are
    weighted by ``1/sigma_ns`` when every sigma is positive, otherwise
    equally.

    Raises
    ------
    DegenerateScanError
        All detunings coincide, or there are fewer points than parameters.
    """
    d, tau, sig = scan.detuning_nm, scan.lifetime_ns, scan.sigma_ns
    n_free = 4 + (2 if float_q else 0)
    if d.size < n_free:
        raise DegenerateScanError(f"{d.size} scan points cannot fit {n_free} parameters")
    if np.ptp(d) == 0:
        raise DegenerateScanError("all detunings are equal")
    spacing = scan.reference_mode_spacing_nm if mode_spacing_nm is None else mode_spacing_nm
    w = 1.0 / sig if np.all(sig > 0) else np.ones_like(d)
    kwargs = dict(q1=q1, q2=q2, mode_spacing_nm=spacing, xi_zpl=xi_zpl,
                  emitter_wavelength_nm=emitter_wavelength_nm)

    half = 0.5 * abs(spacing) if spacing else np.inf
    start = _initial_guess(d, tau, w, {**kwargs, "offset_bounds": (-half, half)})
    if initial:
        for i, name in enumerate(PARAMETER_NAMES):
            if name in initial:
                start[i] = float(initial[name])
    names = list(PARAMETER_NAMES)
    bounds = [(1e-9, None), (0.0, None), (0.0, None),
              (None, None) if np.isinf(half) else (-half, half)]
    if float_q:
        start += [q1, q2]
        names += ["q1", "q2"]
        bounds += [(1.0, None), (1.0, None)]

    def residuals(p):
        kw = dict(kwargs)
        if float_q:
            kw["q1"], kw["q2"] = p[4], p[5]
        return (two_mode_lifetime(d, p[0], p[1], p[2], p[3], **kw) - tau) * w

    return minimize(residuals, start, bounds, names=names)
