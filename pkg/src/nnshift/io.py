"""CSV ingestion and the labels / prototypes output files."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .core import DataError, Dataset


def _parse(text: str, row: int, col: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"row {row}, column {col}: not a number") from None
    if not math.isfinite(v):
        raise DataError(f"row {row}, column {col}: not a finite number")
    return v


def load_csv(path, has_header: bool = False, label_column: int | str | None = None,
             delimiter: str | None = ",") -> Dataset:
    """Read comma-separated reals, optionally pulling out an integer label column.

    ``label_column`` is a 0-based index, or a header name when
    ``has_header`` is set. Negative indices count from the end. Rows and
    columns in error messages are 1-based, counting data rows only.
    ``delimiter=None`` splits on runs of whitespace.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with open(path, newline="") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if delimiter is None:
        rows = [ln.split() for ln in lines]
    else:
        rows = [[c.strip() for c in r] for r in csv.reader(lines, delimiter=delimiter)]
    header = rows.pop(0) if has_header and rows else None
    if not rows:
        raise DataError(f"{path}: empty input")
    width = len(rows[0])
    lc = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if header is None or label_column not in header:
                raise DataError(f"label column {label_column!r} not found in header")
            lc = header.index(label_column)
        else:
            lc = int(label_column)
            lc = lc + width if lc < 0 else lc
        if not 0 <= lc < width:
            raise DataError(f"label column {label_column} out of range for {width} columns")
    data, truth = [], []
    for r, fields in enumerate(rows, start=1):
        if len(fields) != width:
            raise DataError(f"row {r}: expected {width} fields, found {len(fields)}")
        vals = [_parse(f, r, c) for c, f in enumerate(fields, start=1)]
        if lc is not None:
            lab = vals.pop(lc)
            if lab != int(lab):
                raise DataError(f"row {r}, column {lc + 1}: label is not an integer")
            truth.append(int(lab))
        data.append(vals)
    return Dataset(np.array(data, dtype=np.float64), np.array(truth) if lc is not None else None)


def write_points_csv(points, path, truth=None) -> None:
    points = np.atleast_2d(points)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for i, row in enumerate(points):
            out = [repr(float(v)) for v in row]
            if truth is not None:
                out.append(int(truth[i]))
            w.writerow(out)


def write_labels_csv(labels, path) -> None:
    labels = getattr(labels, "labels", labels)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["point_id", "label"])
        for i, lab in enumerate(labels):
            w.writerow([i, int(lab)])


def read_labels_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] and not rows[0][0].lstrip("-").isdigit():
        rows = rows[1:]
    out = np.empty(len(rows), dtype=np.int64)
    for r, row in enumerate(rows, start=1):
        if len(row) < 2:
            raise DataError(f"{path}: row {r} needs point_id,label")
        pid = int(row[0])
        if pid != r - 1:
            raise DataError(f"{path}: row {r} has point_id {pid}, expected {r - 1}")
        out[r - 1] = int(row[1])
    return out


def write_prototypes_csv(result, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        d = result.prototypes.shape[1]
        w.writerow(["candidate_id"] + [f"x{j}" for j in range(d)] + ["iterations", "converged"])
        for i, row in enumerate(result.prototypes):
            w.writerow([i] + [repr(float(v)) for v in row]
                       + [int(result.iterations[i]), int(bool(result.converged[i]))])


def read_prototypes_csv(path) -> Dataset:
    """Coordinates from a file written by :func:`write_prototypes_csv`."""
    ds = load_csv(path, has_header=True)
    if ds.dim < 4:
        raise DataError(f"{path}: not a prototypes file")
    return Dataset(ds.points[:, 1:-2])
