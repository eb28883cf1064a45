"""``purcellkit`` command line.

Exit status is 0 on success, 1 when a check or fit fails (or a solver
gives up) and 2 for usage, config or input-file errors.  Set
``PURCELLKIT_LOG`` to a logging level name (``DEBUG``, ``INFO``, ...) for
diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Any, Sequence

import numpy as np

from purcellkit.cli import io
from purcellkit.cli.io import InputError
from purcellkit.core import (
    CavityMode,
    EmitterTransition,
    Polarization,
    RingGeometry,
    ValidationError,
    from_dict,
    to_dict,
)
from purcellkit.cli import reproduce as repro
from purcellkit.dynamics import make_rng

log = logging.getLogger("purcellkit")


class UsageError(ValueError):
    """Bad flag combination caught after argparse; exit status 2."""


def _setup_logging() -> None:
    level = os.environ.get("PURCELLKIT_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        level=getattr(logging, level, logging.WARNING))


def _common(p: argparse.ArgumentParser, default_format: str = "csv") -> None:
    p.add_argument("--config", metavar="PATH", help="JSON config with \"schema\": "
                   f"\"{io.SCHEMA}\"")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)


def _pick(args, config: dict, name: str, default: Any) -> Any:
    """Command-line value if given, else the config entry, else ``default``."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    return config.get(name, default)


# --------------------------------------------------------------------------- modes

def cmd_modes(args) -> int:
    from purcellkit.wgm import find_resonances

    cfg = io.load_config(args.config)
    geometry = from_dict(RingGeometry, cfg.get("geometry", {}))
    band = tuple(_pick(args, cfg, "band_nm", (620.0, 660.0)))
    pols = _pick(args, cfg, "polarizations", ["TE", "TM"])
    q = float(_pick(args, cfg, "quality_factor", 5000.0))
    modes: list[CavityMode] = []
    for pol in pols:
        modes += find_resonances(geometry, band, Polarization(pol), quality_factor=q)
    if args.format == "json":
        text = io.json_text({"schema": io.SCHEMA, "geometry": to_dict(geometry),
                             "band_nm": list(band), "modes": [
                                 {**to_dict(m), "mode_volume_standing_wave":
                                  m.mode_volume_cubic_lambda_over_n / 2} for m in modes]})
    else:
        text = io.csv_text(io.MODES_HEADER, [
            (m.polarization.value, m.azimuthal_number, m.radial_number, m.wavelength_nm,
             m.mode_volume_cubic_lambda_over_n) for m in modes])
    io.write_output(text, args.out)
    return 0


# --------------------------------------------------------------------------- purcell

def cmd_purcell(args) -> int:
    from purcellkit.purcell import (
        enhanced_branching,
        f_cav,
        mode_id,
        purcell_from_lifetimes,
        total_enhancement,
    )

    cfg = io.load_config(args.config)
    emitter = from_dict(EmitterTransition, cfg["emitter"]) if "emitter" in cfg else repro.nv1()
    if args.xi is not None:
        emitter = from_dict(EmitterTransition, {**to_dict(emitter),
                                                "zpl_branching_ratio": args.xi})
    if "modes" in cfg:
        modes = [from_dict(CavityMode, m) for m in cfg["modes"]]
    else:
        modes = [CavityMode(args.wavelength, args.q, args.v)]
    result = total_enhancement(modes, emitter)
    report: dict[str, Any] = {
        "f_cav": {mode_id(m): f_cav(m) for m in modes},
        "per_mode_f": dict(result.per_mode_f),
        "purcell_f": result.purcell_f,
        "total_factor": result.total_factor,
        "enhanced_branching": enhanced_branching(emitter.zpl_branching_ratio, result.purcell_f),
    }
    tau_c = args.tau_coupled if args.tau_coupled is not None else cfg.get("tau_coupled_ns")
    if tau_c is not None:
        f = purcell_from_lifetimes(emitter.bulk_lifetime_ns, float(tau_c),
                                   emitter.zpl_branching_ratio)
        report["lifetime_purcell_f"] = f
        report["lifetime_total_factor"] = 1.0 + f
    for key, value in report.items():
        if not isinstance(value, dict):
            print(f"{key:>24}  {value:.6g}", file=sys.stderr)
    if args.format == "json":
        text = io.json_text({"schema": io.SCHEMA, **report})
    else:
        flat = []
        for key, value in report.items():
            if isinstance(value, dict):
                flat += [(f"{key}[{k}]", v) for k, v in value.items()]
            else:
                flat.append((key, value))
        text = io.csv_text(("quantity", "value"), flat)
    io.write_output(text, args.out)
    return 0


# --------------------------------------------------------------------------- simulate

def cmd_simulate(args) -> int:
    from purcellkit.dynamics import simulate_histogram

    cfg = io.load_config(args.config)
    if args.kind == "detuning":
        xi = float(_pick(args, cfg, "xi", repro.XI_ZPL))
        scan = repro.noisy_scan(args.seed, xi)
        text = io.scan_csv(scan) if args.format == "csv" else io.json_text(
            {"schema": io.SCHEMA, "reference_mode_spacing_nm": scan.reference_mode_spacing_nm,
             "points": [list(p) for p in scan.points]})
        io.write_output(text, args.out)
        return 0
    tau = float(_pick(args, cfg, "tau", repro.TAU0_NS))
    photons = int(_pick(args, cfg, "photons", 100_000))
    width = float(_pick(args, cfg, "bin_width", 0.2))
    rate = float(_pick(args, cfg, "rep_rate", 4.75))
    contamination = tuple(_pick(args, cfg, "contamination", (0.3, 1.0)))
    hist = simulate_histogram(tau, photons, width, rate, contamination, seed=args.seed)
    if args.format == "json":
        text = io.json_text({"schema": io.SCHEMA, "repetition_rate_mhz": rate,
                             "bin_edges_ns": hist.bin_edges_ns.tolist(),
                             "counts": hist.counts.tolist()})
    else:
        text = io.histogram_csv(hist)
    io.write_output(text, args.out)
    return 0


# --------------------------------------------------------------------------- fits

def _report_text(report, fmt: str) -> str:
    if fmt == "json":
        return io.json_text({"schema": io.SCHEMA, **report.to_dict()})
    rows = [(k, v, report.sigmas[k]) for k, v in report.parameters.items()]
    rows += [("reduced_chi2", report.reduced_chi2, ""), ("converged", report.converged, ""),
             ("iterations", report.iterations, "")]
    return io.csv_text(("parameter", "value", "sigma"), rows)


def cmd_fit_lifetime(args) -> int:
    from purcellkit.fit import decay_curve, fit_lifetime

    hist = io.read_histogram(args.input, args.rep_rate)
    report = fit_lifetime(hist, args.skip_ns, args.model, args.weighting)
    io.write_output(_report_text(report, args.format), args.out)
    if args.curve:
        t = hist.centers_ns
        width = np.diff(hist.bin_edges_ns)
        io.write_output(io.csv_text(("time_ns", "counts", "fit"), zip(
            t.tolist(), hist.counts.tolist(), (decay_curve(report, t) * width).tolist())),
            args.curve)
    log.info("tau = %.4f +- %.4f ns", report.parameters["tau_ns"], report.sigmas["tau_ns"])
    return 0 if report.converged else 1


def cmd_fit_detuning(args) -> int:
    from purcellkit.fit import fit_detuning_scan, two_mode_lifetime

    scan = io.read_scan(args.input, args.mode_spacing)
    report = fit_detuning_scan(scan, q1=args.q1, q2=args.q2, xi_zpl=args.xi,
                               emitter_wavelength_nm=args.emitter_wavelength,
                               float_q=args.float_q)
    io.write_output(_report_text(report, args.format), args.out)
    if args.curve:
        p = report.parameters
        d = np.linspace(scan.detuning_nm.min(), scan.detuning_nm.max(), 401)
        tau = two_mode_lifetime(d, p["tau0_ns"], p["peak_f1"], p["peak_f2"],
                                p["center_offset_nm"], q1=p.get("q1", args.q1),
                                q2=p.get("q2", args.q2), mode_spacing_nm=args.mode_spacing,
                                xi_zpl=args.xi, emitter_wavelength_nm=args.emitter_wavelength)
        io.write_output(io.csv_text(("detuning_nm", "lifetime_ns"), zip(d.tolist(), tau.tolist())),
                        args.curve)
    return 0 if report.converged else 1


# --------------------------------------------------------------------------- spectra

def demo_spectrum_config():
    """Ten strain-split lines around 637 nm, the C1/C2 doublet a few nm to the blue."""
    from purcellkit.spectra import CavityPeak, SpectralLine, SpectrumConfig

    rng = make_rng(7)
    centers = np.sort(636.6 + rng.random(9))
    lines = [SpectralLine(float(c), 0.02, float(0.2 + rng.random())) for c in centers]
    lines.append(SpectralLine(repro.EMITTER_NM, 0.02, 0.5, overlap_eta=0.6))
    modes = (CavityPeak(CavityMode(634.5 - repro.MODE_SPACING_NM, repro.Q1, 20.0), 3.0),
             CavityPeak(CavityMode(634.5, repro.Q2, 20.0), 3.0))
    return SpectrumConfig(tuple(lines), modes, ((630.0, 0.3), (645.0, 0.6)),
                          (632.0, 640.0, 0.005))


def _spectrum_config(cfg: dict):
    from purcellkit.spectra import CavityPeak, SpectralLine, SpectrumConfig

    if "spectrum" not in cfg:
        return demo_spectrum_config()
    s = cfg["spectrum"]
    try:
        return SpectrumConfig(
            tuple(SpectralLine(**ln) for ln in s.get("lines", [])),
            tuple(CavityPeak(from_dict(CavityMode, c["mode"]), c["amplitude"])
                  for c in s.get("cavity_modes", [])),
            tuple(tuple(k) for k in s.get("sideband", [])),
            tuple(s.get("wavelength_grid_nm", (630.0, 645.0, 0.005))))
    except (TypeError, KeyError, ValueError) as exc:
        raise InputError(f"bad spectrum config: {exc}") from exc


def cmd_spectrum(args) -> int:
    from purcellkit.spectra import find_peaks, synthesize

    config = _spectrum_config(io.load_config(args.config))
    data = synthesize(config)
    if args.format == "json":
        peaks = find_peaks(data, args.min_prominence)
        text = io.json_text({
            "schema": io.SCHEMA,
            "wavelength_nm": data[:, 0].tolist(), "intensity": data[:, 1].tolist(),
            "peaks": [{"center_nm": p.center_nm, "fwhm_nm": p.fwhm_nm,
                       "q_estimate": p.q_estimate} for p in peaks]})
    else:
        text = io.csv_text(io.SPECTRUM_HEADER, data.tolist())
    io.write_output(text, args.out)
    return 0


def cmd_tuning_map(args) -> int:
    from purcellkit.spectra import tuning_map

    config = _spectrum_config(io.load_config(args.config))
    start, stop, step = args.shifts
    if not step > 0:
        raise UsageError("--shifts step must be > 0")
    shifts = start + step * np.arange(int(round((stop - start) / step)) + 1)
    grid = tuning_map(config, shifts)
    wl = config.grid()
    header = ["shift_nm"] + [io.fmt(float(w)) for w in wl]
    rows = [[float(s)] + row.tolist() for s, row in zip(shifts, grid)]
    io.write_output(io.csv_text(header, rows, delimiter="\t"), args.out)
    return 0


# --------------------------------------------------------------------------- reproduce

def cmd_reproduce(args) -> int:
    text, ok = repro.cmd_reproduce(args.xi if args.xi is not None else repro.XI_ZPL)
    io.write_output(text, args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="purcellkit",
        description="Cavity-enhanced emission of a diamond microring: mode solver, Purcell "
                    "factors, lifetime simulation and fits.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modes", help="list whispering-gallery resonances")
    _common(p)
    p.add_argument("--band", dest="band_nm", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--polarization", dest="polarizations", action="append",
                   choices=("TE", "TM"))
    p.add_argument("--q", dest="quality_factor", type=float)
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("purcell", help="Purcell factors and branching ratio")
    _common(p, "json")
    p.add_argument("--q", type=float, default=4000.0)
    p.add_argument("--v", type=float, default=17.0, help="mode volume in (lambda/n)^3")
    p.add_argument("--wavelength", type=float, default=repro.EMITTER_NM)
    p.add_argument("--xi", type=float, help="ZPL branching ratio override")
    p.add_argument("--tau-coupled", type=float, help="coupled lifetime in ns")
    p.set_defaults(func=cmd_purcell)

    p = sub.add_parser("simulate", help="synthetic TCSPC histogram or detuning scan")
    _common(p)
    p.add_argument("--kind", choices=("histogram", "detuning"), default="histogram")
    p.add_argument("--tau", type=float)
    p.add_argument("--photons", type=int)
    p.add_argument("--bin-width", type=float)
    p.add_argument("--rep-rate", type=float)
    p.add_argument("--contamination", type=float, nargs=2, metavar=("FRACTION", "TAU"))
    p.add_argument("--xi", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit-lifetime", help="exponential fit of a histogram CSV")
    _common(p, "json")
    p.add_argument("input", help="CSV with header time_ns,counts")
    p.add_argument("--skip-ns", type=float, default=3.0)
    p.add_argument("--model", choices=("single_exp", "single_exp_plus_constant"),
                   default="single_exp")
    p.add_argument("--weighting", choices=("poisson", "neyman"), default="poisson")
    p.add_argument("--rep-rate", type=float, default=4.75)
    p.add_argument("--curve", metavar="PATH", help="also write the fitted curve as CSV")
    p.set_defaults(func=cmd_fit_lifetime)

    p = sub.add_parser("fit-detuning", help="two-mode fit of a lifetime-vs-detuning CSV")
    _common(p, "json")
    p.add_argument("input", help="CSV with header detuning_nm,lifetime_ns,sigma_ns")
    p.add_argument("--q1", type=float, default=repro.Q1)
    p.add_argument("--q2", type=float, default=repro.Q2)
    p.add_argument("--mode-spacing", type=float, default=repro.MODE_SPACING_NM)
    p.add_argument("--xi", type=float, default=repro.XI_ZPL)
    p.add_argument("--emitter-wavelength", type=float, default=repro.EMITTER_NM)
    p.add_argument("--float-q", action="store_true", help="fit Q1 and Q2 as well")
    p.add_argument("--curve", metavar="PATH", help="also write the fitted curve as CSV")
    p.set_defaults(func=cmd_fit_detuning)

    p = sub.add_parser("spectrum", help="synthetic photoluminescence spectrum")
    _common(p)
    p.add_argument("--min-prominence", type=float, default=0.1)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("tuning-map", help="spectra as the cavity is tuned (TSV)")
    _common(p)
    p.add_argument("--shifts", type=float, nargs=3, default=(0.0, 3.0, 0.01),
                   metavar=("START", "STOP", "STEP"))
    p.set_defaults(func=cmd_tuning_map)

    p = sub.add_parser("reproduce", help="pass/fail table of the headline numbers")
    _common(p)
    p.add_argument("--xi", type=float, help="ZPL branching ratio override")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, UsageError, ValidationError, KeyError) as exc:
        print(f"purcellkit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"purcellkit {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
