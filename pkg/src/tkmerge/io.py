"""CSV reading and writing for data matrices, label vectors and result tables.

Dialect: comma separator, '.' decimal, UTF-8 (a BOM is tolerated), LF or
CRLF line ends.  A single header row is allowed and detected by content: the
first row is a header iff one of its cells is not a number.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError


class CsvFormatError(InputError):
    """A CSV file could not be parsed; the message names file, line and column."""


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _rows(path):
    path = Path(path)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            return [(i, row) for i, row in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in row)]
    except UnicodeDecodeError as exc:
        raise CsvFormatError(f"{path}: not valid UTF-8 ({exc})") from None


def read_matrix(path):
    """Numeric matrix from a CSV file.

    Returns
    -------
    values : ndarray, shape (n, p)
    header : list of str or None
    """
    rows = _rows(path)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    header = None
    if not all(_is_number(c.strip()) for c in rows[0][1]):
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
        if not rows:
            raise CsvFormatError(f"{path}: header row but no data rows")
    width = len(header) if header is not None else len(rows[0][1])
    out = np.empty((len(rows), width))
    for r, (line, cells) in enumerate(rows):
        if len(cells) != width:
            raise CsvFormatError(f"{path}: line {line}: expected {width} columns, found {len(cells)}")
        for c, cell in enumerate(cells):
            try:
                v = float(cell.strip())
            except ValueError:
                raise CsvFormatError(f"{path}: line {line}, column {c + 1}: not a number: {cell!r}") from None
            if not math.isfinite(v):
                raise CsvFormatError(f"{path}: line {line}, column {c + 1}: non-finite value {cell!r}")
            out[r, c] = v
    return out, header


def read_labels(path) -> np.ndarray:
    """Integer label vector from a one-column CSV (optional header)."""
    values, _ = read_matrix(path)
    if values.shape[1] != 1:
        raise CsvFormatError(f"{path}: expected one label column, found {values.shape[1]}")
    v = values[:, 0]
    if np.any(v != np.round(v)) or np.any(v < 0):
        bad = int(np.flatnonzero((v != np.round(v)) | (v < 0))[0])
        raise CsvFormatError(f"{path}: row {bad + 1}: labels must be non-negative integers, got {v[bad]}")
    return v.astype(np.int64)


def fmt_exact(v: float) -> str:
    """Shortest plain-decimal string that reads back to the same double."""
    return np.format_float_positional(float(v), unique=True, trim="-")


def fmt_12(v: float) -> str:
    """Plain decimal with 12 significant digits."""
    v = float(v)
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return np.format_float_positional(v, precision=12, unique=False, fractional=False, trim="-")


def write_matrix(path, values, header=None, exact: bool = False) -> None:
    """Write a numeric matrix; ``exact`` keeps every bit, otherwise 12 significant digits."""
    fmt = fmt_exact if exact else fmt_12
    values = np.atleast_2d(np.asarray(values, dtype=float))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in values:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_labels(path, labels) -> None:
    """One integer per line, no header."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("".join(f"{int(v)}\n" for v in np.asarray(labels).ravel()))


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_12(v)
    return str(v)


def write_table(path, rows, columns=None) -> None:
    """Write a list of dicts as CSV with a header row."""
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(columns)
        for row in rows:
            out.writerow([_cell(row.get(c, "")) for c in columns])


def read_table(path) -> list:
    """Read a CSV written by :func:`write_table` into a list of string dicts."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        return list(csv.DictReader(fh))


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")
