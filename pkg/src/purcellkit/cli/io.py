"""File formats used by the command line: JSON configs, CSV tables, atomic writes."""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import tempfile
from typing import Any, Iterable, Sequence

import numpy as np

from purcellkit.dynamics import DEFAULT_REPETITION_RATE_MHZ, DetuningScan, Histogram

SCHEMA = "purcellkit/1"


class InputError(ValueError):
    """A config or data file could not be parsed; the CLI exits with status 2."""


def load_config(path: str | None) -> dict[str, Any]:
    """Read a JSON config; its top-level ``schema`` must be ``purcellkit/1``."""
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
                         f"{exc.msg}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    schema = data.get("schema")
    if schema != SCHEMA:
        raise InputError(f"{path}: expected \"schema\": \"{SCHEMA}\", got {schema!r}")
    return data


def fmt(value: Any) -> str:
    """Shortest round-tripping text for numbers, plain str otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]], delimiter: str = ",") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_output(text: str, path: str | None) -> None:
    """Write to ``path`` via a temporary file and rename, or to stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".purcellkit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_table(path: str, header: Sequence[str]) -> np.ndarray:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError as exc:
        raise InputError(f"input file not found: {path}") from exc
    if not rows or [c.strip() for c in rows[0]] != list(header):
        raise InputError(f"{path}: expected header {','.join(header)}")
    body = [r for r in rows[1:] if r]
    try:
        values = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if body and values.shape[1] != len(header):
        raise InputError(f"{path}: every row needs {len(header)} columns")
    return values.reshape(-1, len(header))


HISTOGRAM_HEADER = ("time_ns", "counts")
SCAN_HEADER = ("detuning_nm", "lifetime_ns", "sigma_ns")
SPECTRUM_HEADER = ("wavelength_nm", "intensity")
MODES_HEADER = ("polarization", "m", "p", "wavelength_nm", "mode_volume")


def histogram_csv(hist: Histogram) -> str:
    """One row per bin; ``time_ns`` is the bin's left edge."""
    return csv_text(HISTOGRAM_HEADER, zip(hist.bin_edges_ns[:-1].tolist(), hist.counts.tolist()))


def read_histogram(path: str, repetition_rate_mhz: float = DEFAULT_REPETITION_RATE_MHZ
                   ) -> Histogram:
    """Histogram from ``time_ns,counts`` rows on a uniform grid of left bin edges."""
    data = _read_table(path, HISTOGRAM_HEADER)
    if data.shape[0] < 2:
        raise InputError(f"{path}: need at least two bins")
    t = data[:, 0]
    width = np.diff(t)
    if np.any(width <= 0) or np.ptp(width) > 1e-6 * width.mean():
        raise InputError(f"{path}: time_ns must be evenly spaced and increasing")
    edges = np.append(t, t[-1] + width.mean())
    try:
        return Histogram(edges, data[:, 1], repetition_rate_mhz)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def scan_csv(scan: DetuningScan) -> str:
    return csv_text(SCAN_HEADER, scan.points)


def read_scan(path: str, reference_mode_spacing_nm: float) -> DetuningScan:
    data = _read_table(path, SCAN_HEADER)
    try:
        return DetuningScan(tuple(map(tuple, data.tolist())), reference_mode_spacing_nm)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
