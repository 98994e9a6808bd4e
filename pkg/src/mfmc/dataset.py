"""Multi-fidelity dataset container and its CSV representation.

A dataset holds n paired records (x1_i, x2_i) plus m extra low-fidelity
records x2_j, with optional per-block importance weights.  The CSV layout is
a single file with a mandatory header ``x1,x2`` (optionally ``x1,x2,w``),
UTF-8, ``.`` decimal separator; a row with an empty ``x1`` field is a
low-fidelity-only record.  Numbers are written as shortest round-trip
decimals (up to 17 significant digits) so that a write/read cycle is exact.
"""

import csv
import io
import os

import numpy as np

from .errors import DataError, ParseError


def _normalized_weights(raw, block, n):
    if raw is None:
        return None
    w = np.asarray(raw, dtype=float)
    if w.shape != (n,):
        raise DataError(f"{block} weights must have length {n}, got shape {w.shape}")
    if np.any(~np.isfinite(w)) or np.any(w <= 0.0):
        raise DataError(f"{block} weights must be positive and finite")
    total = float(np.sum(w))
    w = w / total
    if abs(float(np.sum(w)) - 1.0) > 1e-12:
        raise DataError(f"{block} weights failed to normalize")
    return w


class MFDataset:
    """Paired high/low-fidelity observations plus extra low-fidelity draws.

    Parameters
    ----------
    x1, x2 : array_like
        The n paired records; equal length, n >= 2.
    x2_extra : array_like, optional
        The m additional low-fidelity records.
    weights : array_like, optional
        Positive weights over the paired block; normalized to sum to one.
    weights_extra : array_like, optional
        Positive weights over the low-fidelity-only block.
    """

    def __init__(self, x1, x2, x2_extra=None, weights=None, weights_extra=None):
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        x2 = np.atleast_1d(np.asarray(x2, dtype=float))
        if x1.shape != x2.shape or x1.ndim != 1:
            raise DataError("paired blocks x1 and x2 must be 1-d and equally long")
        if x1.size < 2:
            raise DataError(f"need at least 2 paired records, got {x1.size}")
        if np.any(~np.isfinite(x1)) or np.any(~np.isfinite(x2)):
            raise DataError("non-finite value in the paired block")
        extra = (np.empty(0) if x2_extra is None
                 else np.atleast_1d(np.asarray(x2_extra, dtype=float)))
        if extra.ndim != 1 or np.any(~np.isfinite(extra)):
            raise DataError("low-fidelity block must be 1-d and finite")
        self.x1 = x1
        self.x2 = x2
        self.x2_extra = extra
        self.weights = _normalized_weights(weights, "paired", x1.size)
        self.weights_extra = _normalized_weights(weights_extra, "low-fidelity", extra.size)

    @property
    def n(self):
        return self.x1.size

    @property
    def m(self):
        return self.x2_extra.size

    @property
    def x2_all(self):
        return np.concatenate([self.x2, self.x2_extra])

    def paired_weights(self):
        """Paired-block weights, uniform 1/n when none were supplied."""
        if self.weights is None:
            return np.full(self.n, 1.0 / self.n)
        return self.weights

    def all_low_weights(self):
        """Weights over all n + m low-fidelity values (normalized)."""
        w_pair = self.paired_weights() * self.n
        w_extra = (np.ones(self.m) if self.weights_extra is None
                   else self.weights_extra * self.m)
        w = np.concatenate([w_pair, w_extra])
        return w / np.sum(w)

    def __repr__(self):
        return f"MFDataset(n={self.n}, m={self.m})"


def _fmt(value):
    return repr(float(value))


def _parse_float(text, line_no, column):
    try:
        return float(text)
    except ValueError:
        raise ParseError(
            f"line {line_no}: cannot parse {column} value {text!r}", line=line_no
        ) from None


def load_dataset(path_or_file):
    """Read a dataset from the single-file CSV convention.

    Rows with both fields fill the paired block; rows with an empty ``x1``
    fill the low-fidelity-only block.  A ``w`` column provides weights,
    normalized per block.
    """
    if hasattr(path_or_file, "read"):
        return _load(path_or_file)
    if not os.path.exists(path_or_file):
        raise DataError(f"no such file: {path_or_file}")
    with open(path_or_file, newline="", encoding="utf-8") as fh:
        return _load(fh)


def _load(fh):
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty file; expected a header row") from None
    header = [h.strip() for h in header]
    if header[:2] != ["x1", "x2"] or len(header) > 3 or (len(header) == 3 and header[2] != "w"):
        raise DataError(f"expected header x1,x2[,w]; got {header!r}")
    has_w = len(header) == 3
    x1, x2, w1 = [], [], []
    ex2, wex = [], []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"line {line_no}: expected {len(header)} fields, got {len(row)}",
                             line=line_no)
        wval = _parse_float(row[2], line_no, "w") if has_w else None
        if wval is not None and wval < 0.0:
            raise DataError(f"line {line_no}: negative weight {wval!r}")
        x2val = _parse_float(row[1], line_no, "x2")
        if row[0].strip() == "":
            ex2.append(x2val)
            wex.append(wval)
        else:
            x1.append(_parse_float(row[0], line_no, "x1"))
            x2.append(x2val)
            w1.append(wval)
    return MFDataset(
        x1, x2, np.asarray(ex2) if ex2 else None,
        weights=None if not has_w else w1,
        weights_extra=None if (not has_w or not ex2) else wex,
    )


def save_dataset(dataset, path_or_file):
    """Write a dataset under the CSV convention with exact round-trip floats."""
    if hasattr(path_or_file, "write"):
        _save(dataset, path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            _save(dataset, fh)


def _save(dataset, fh):
    has_w = dataset.weights is not None or dataset.weights_extra is not None
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["x1", "x2", "w"] if has_w else ["x1", "x2"])
    w_pair = dataset.weights if dataset.weights is not None else np.full(dataset.n, 1.0 / dataset.n)
    w_ex = (dataset.weights_extra if dataset.weights_extra is not None
            else (np.full(dataset.m, 1.0 / dataset.m) if dataset.m else np.empty(0)))
    for i in range(dataset.n):
        row = [_fmt(dataset.x1[i]), _fmt(dataset.x2[i])]
        if has_w:
            row.append(_fmt(w_pair[i]))
        writer.writerow(row)
    for j in range(dataset.m):
        row = ["", _fmt(dataset.x2_extra[j])]
        if has_w:
            row.append(_fmt(w_ex[j]))
        writer.writerow(row)


def dataset_to_csv_text(dataset):
    """Dataset rendered as CSV text (used by the simulate command)."""
    buf = io.StringIO()
    _save(dataset, buf)
    return buf.getvalue()
