"""Result and interchange file formats.

ScanFile: a CSV whose first line is ``# window_lo_mhz,window_hi_mhz,bin_width_mhz`` in
fixed-point MHz with three decimals, followed by one row of non-negative integer bin
counts per scan. Every other artifact is either a CSV table with the same fixed-point
convention or a sorted, indented JSON document.
"""
import csv
import json
import logging
from pathlib import Path

import numpy as np

from ..exceptions import DomainError, ScanParseError
from ..lineshape import FrequencyWindow
from ..synth import INGESTED, Scan

__all__ = [
    "FIT_CSV_COLUMNS",
    "write_scan_file",
    "read_scan_file",
    "ingest",
    "write_fit_csv",
    "write_json",
    "write_matrix_csv",
    "write_surface_csv",
    "write_table_csv",
]

logger = logging.getLogger(__name__)

FIT_CSV_COLUMNS = (
    "index",
    "accepted",
    "converged",
    "reason",
    "fwhm_mhz",
    "stderr_fwhm_mhz",
    "amplitude",
    "center_mhz",
    "sigma_mhz",
    "gamma_mhz",
    "offset",
    "rss",
)


def _mhz(value):
    return "" if value is None or not np.isfinite(value) else f"{value:.3f}"


def _number(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "" if not np.isfinite(value) else f"{value:.6g}"


def _writer(f):
    return csv.writer(f, lineterminator="\n")


def write_scan_file(path, scans):
    scans = list(scans)
    if not scans:
        raise DomainError("cannot write an empty scan file")
    window = scans[0].window
    if any(scan.window != window for scan in scans):
        raise DomainError("all scans in one scan file must share a frequency window")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write(f"# {window.lo:.3f},{window.hi:.3f},{window.bin_width:.3f}\n")
        writer = _writer(f)
        for scan in scans:
            writer.writerow(scan.counts.tolist())
    return path


def _parse_header(line):
    if not line.startswith("#"):
        raise ScanParseError("missing '# window_lo_mhz,window_hi_mhz,bin_width_mhz' header", line=1)
    fields = [f.strip() for f in line[1:].split(",")]
    if len(fields) != 3:
        raise ScanParseError(f"header needs 3 values, got {len(fields)}", line=1)
    try:
        return FrequencyWindow(*(float(f) for f in fields))
    except ValueError as error:
        raise ScanParseError(f"invalid header: {error}", line=1) from None


def _parse_count(text, lineno):
    try:
        value = int(text)
    except ValueError:
        raise ScanParseError(f"count {text!r} is not an integer", line=lineno) from None
    if value < 0:
        raise ScanParseError(f"count {value} is negative", line=lineno)
    return value


def read_scan_file(path, resonance_mhz=0.0):
    """Parse a ScanFile; frequencies are shifted so ``resonance_mhz`` sits at 0.

    Blank lines are skipped. Scan indices count data rows from 0.
    """
    with Path(path).open("r", encoding="utf-8", newline="") as f:
        lines = f.read().splitlines()
    if not lines:
        raise ScanParseError("empty scan file", line=1)
    window = _parse_header(lines[0].strip())
    n_bins = window.n_bins
    scans = []
    for lineno, row in enumerate(csv.reader(lines[1:]), start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != n_bins:
            raise ScanParseError(f"row has {len(row)} values but the header implies {n_bins} bins", line=lineno)
        counts = np.array([_parse_count(cell.strip(), lineno) for cell in row], dtype=np.int64)
        scans.append(counts)
    shifted = window.shifted(resonance_mhz) if resonance_mhz else window
    return [Scan(window=shifted, counts=counts, provenance=INGESTED, index=i) for i, counts in enumerate(scans)]


def ingest(path, resonance_mhz=0.0):
    scans = read_scan_file(path, resonance_mhz)
    logger.info("ingested %d scans from %s", len(scans), path)
    return scans


def write_fit_csv(path, batch):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = _writer(f)
        writer.writerow(FIT_CSV_COLUMNS)
        for result in batch:
            p = result.params
            writer.writerow(
                [
                    result.index,
                    int(result.accepted),
                    int(result.converged),
                    result.reason,
                    _mhz(result.fwhm),
                    _mhz(result.stderr_fwhm) if p is not None else "",
                    _number(p.amplitude) if p is not None else "",
                    _mhz(p.center) if p is not None else "",
                    _mhz(p.sigma) if p is not None else "",
                    _mhz(p.gamma) if p is not None else "",
                    _number(p.offset) if p is not None else "",
                    _number(result.rss),
                ]
            )
    return path


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    return value


def write_json(path, data):
    """Sorted, indented JSON; non-finite floats become ``null``."""
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_matrix_csv(path, matrix, row_values, column_values, row_label="gamma_mhz", column_label="nbar"):
    """``matrix`` with one labelled row per ``row_values`` entry and one column per
    ``column_values`` entry; the corner cell reads ``<row_label>\\<column_label>``."""
    matrix = np.asarray(matrix, dtype=float)
    assert matrix.shape == (len(row_values), len(column_values))
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = _writer(f)
        writer.writerow([f"{row_label}\\{column_label}"] + [_number(v) for v in column_values])
        for value, row in zip(row_values, matrix):
            writer.writerow([_number(value)] + [_number(x) for x in row])
    return path


def write_surface_csv(path, grid):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = _writer(f)
        writer.writerow(["gamma_mhz", "nbar", "S"])
        for gamma, nbar, s in grid.rows():
            writer.writerow([_mhz(gamma), _number(nbar), _number(s)])
    return path


def write_table_csv(path, columns, rows):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = _writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_number(v) if not isinstance(v, str) else v for v in row])
    return path
