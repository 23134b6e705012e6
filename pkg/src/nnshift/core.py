"""Dataset container, min-max normalization and the Euclidean distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


class DataError(ValueError):
    """Raised for malformed or unusable input data."""


class InvariantError(RuntimeError):
    """An internal consistency check failed."""


@dataclass(frozen=True)
class Dataset:
    """An immutable sample of ``n`` points in ``d`` dimensions.

    Point ``i`` is row ``i`` of ``points``; its id is its row index.
    ``truth`` optionally carries one integer ground-truth label per point.
    """

    points: np.ndarray
    truth: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise DataError("points must be a 2-D array")
        if not np.all(np.isfinite(pts)):
            raise DataError("coordinates must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if self.truth is not None:
            truth = np.array(self.truth, dtype=np.int64, copy=True)
            if truth.shape != (pts.shape[0],):
                raise DataError(
                    f"truth has {truth.size} labels for {pts.shape[0]} points")
            truth.flags.writeable = False
            object.__setattr__(self, "truth", truth)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def with_points(self, points) -> "Dataset":
        return Dataset(points, self.truth)


@dataclass(frozen=True)
class NormStats:
    lo: np.ndarray
    hi: np.ndarray

    def apply(self, points) -> np.ndarray:
        """Map ``points`` into the unit box defined by these statistics.

        Dimensions with ``hi == lo`` map to 0.
        """
        pts = np.asarray(points, dtype=np.float64)
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        out = (pts - self.lo) / safe
        out[..., span <= 0] = 0.0
        return out


def min_max_normalize(ds: Dataset) -> tuple[Dataset, NormStats]:
    if ds.n == 0:
        raise DataError("empty input")
    stats = NormStats(ds.points.min(axis=0), ds.points.max(axis=0))
    return ds.with_points(stats.apply(ds.points)), stats


def euclidean_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DataError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.sqrt(np.dot(diff, diff)))
