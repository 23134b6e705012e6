"""Scalar random-projection LSH with interval buckets and neighbor layers.

Every point is projected onto one random Gaussian direction,
``L(x) = z.x + u``. The sample's projected range is cut into ``m1``
equal-width intervals, one bucket per interval. A query's candidate pool
(its reservoir) is its own bucket plus ``p`` adjacent buckets on each side,
grown outward until it holds at least ``k`` points.

Bucket ids are 0-based throughout.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import DataError, Dataset
from .knn import NeighborList, exact_knn


@dataclass(frozen=True)
class ProjectionHasher:
    z: np.ndarray
    u: float
    seed: int

    @property
    def dim(self) -> int:
        return self.z.shape[0]


def build_hasher(dim: int, seed: int) -> ProjectionHasher:
    if dim < 1:
        raise DataError("dimension must be at least 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(dim)
    u = float(rng.random())
    z.flags.writeable = False
    return ProjectionHasher(z, u, int(seed))


def project(h: ProjectionHasher, x) -> np.ndarray | float:
    """Projection ``z.x + u`` of one point (scalar) or of each row of a 2-D array."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != h.dim:
        raise DataError(f"point has dimension {x.shape[-1]}, hasher expects {h.dim}")
    out = x @ h.z + h.u
    return float(out) if out.ndim == 0 else out


def _intervals(values, lo: float, width: float, m1: int) -> np.ndarray:
    values = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if width <= 0:
        return np.zeros(values.shape, dtype=np.int64)
    j = np.floor((values - lo) / width)
    return np.clip(j, 0, m1 - 1).astype(np.int64)


@dataclass(frozen=True)
class BucketIndex:
    hasher: ProjectionHasher
    m1: int
    lo: float
    hi: float
    width: float
    points: np.ndarray = field(repr=False)
    projections: np.ndarray = field(repr=False)
    point_bucket: np.ndarray = field(repr=False)
    buckets: tuple = field(repr=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def bucket_sizes(self) -> np.ndarray:
        return np.array([len(b) for b in self.buckets], dtype=np.int64)


def build_index(h: ProjectionHasher, ds: Dataset, m1: int) -> BucketIndex:
    """Hash every sample point into one of ``m1`` equal-width projection intervals.

    Interval ``j`` is ``[lo + j*width, lo + (j+1)*width)``; the last one is
    closed on the right. When all projections coincide every point lands in
    bucket 0.
    """
    if ds.n == 0:
        raise DataError("empty input")
    if m1 < 1:
        raise DataError("m1 must be at least 1")
    proj = project(h, ds.points)
    proj = np.atleast_1d(proj)
    lo = float(proj.min())
    hi = float(proj.max())
    width = (hi - lo) / m1
    point_bucket = _intervals(proj, lo, width, m1)
    order = np.argsort(point_bucket, kind="stable")
    bounds = np.searchsorted(point_bucket[order], np.arange(m1 + 1))
    buckets = tuple(order[bounds[j]:bounds[j + 1]] for j in range(m1))
    for arr in (proj, point_bucket):
        arr.flags.writeable = False
    return BucketIndex(h, m1, lo, hi, width, ds.points, proj, point_bucket, buckets)


def hash_point(idx: BucketIndex, x) -> int:
    """Bucket of an arbitrary point.

    Projections outside the sample range clamp to the edge buckets.
    """
    return int(_intervals(project(idx.hasher, x), idx.lo, idx.width, idx.m1)[0])


def hash_points(idx: BucketIndex, xs) -> np.ndarray:
    return _intervals(project(idx.hasher, np.atleast_2d(xs)), idx.lo, idx.width, idx.m1)


@dataclass(frozen=True)
class Reservoir:
    center: int
    layers: int
    bucket_ids: tuple
    ids: np.ndarray

    def __len__(self):
        return len(self.ids)


def _growth_order(center: int, m1: int):
    # center, then alternate right and left by increasing offset
    yield center
    for off in range(1, m1):
        for b in (center + off, center - off):
            if 0 <= b < m1:
                yield b


def reservoir(idx: BucketIndex, center: int, p: int, k: int) -> Reservoir:
    """Candidate neighbor pool around bucket ``center``.

    Starts from the buckets within ``p`` of ``center``; while the pool holds
    fewer than ``k`` points the next adjacent bucket is appended, right side
    first.
    """
    if not 0 <= center < idx.m1:
        raise DataError(f"bucket {center} outside 0..{idx.m1 - 1}")
    if p < 0:
        raise DataError("p must be non-negative")
    chosen = []
    size = 0
    for b in _growth_order(center, idx.m1):
        if abs(b - center) > p and size >= k:
            break
        chosen.append(b)
        size += len(idx.buckets[b])
    ids = np.sort(np.concatenate([idx.buckets[b] for b in chosen]))
    return Reservoir(center, p, tuple(chosen), ids)


@dataclass(frozen=True)
class ReservoirTable:
    """All reservoirs of an index packed as CSR arrays for the compiled kernels."""

    ptr: np.ndarray
    ids: np.ndarray
    pts: np.ndarray

    def pool(self, b: int) -> np.ndarray:
        return np.sort(self.ids[self.ptr[b]:self.ptr[b + 1]])


def reservoir_table(idx: BucketIndex, p: int, k: int) -> ReservoirTable:
    # Selection is keyed on (distance, id), so pool order never changes the
    # result; a fixed shuffle avoids the slow path where scan order tracks
    # distance (e.g. pixels stored row by row).
    rng = np.random.default_rng(idx.hasher.seed)
    pools = [rng.permutation(reservoir(idx, b, p, k).ids) for b in range(idx.m1)]
    ptr = np.zeros(idx.m1 + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(r) for r in pools])
    ids = np.concatenate(pools).astype(np.int64)
    pts = np.ascontiguousarray(idx.points[ids])
    return ReservoirTable(ptr, ids, pts)


def approx_knn(idx: BucketIndex, x, k: int, p: int) -> NeighborList:
    """Exact k nearest neighbors of ``x`` restricted to its reservoir."""
    if k < 1:
        raise DataError("k must be positive")
    if k > idx.n:
        raise DataError("k exceeds dataset size")
    x = np.ascontiguousarray(x, dtype=np.float64)
    pool = reservoir(idx, hash_point(idx, x), p, k).ids
    ids = np.empty(k, dtype=np.int64)
    d2 = np.empty(k, dtype=np.float64)
    found = _kernels.knn_in_pool(np.ascontiguousarray(idx.points[pool]), pool,
                                 x, k, -1, ids, d2)
    return NeighborList(ids[:found], np.sqrt(d2[:found]))


def knn_recall(idx: BucketIndex, queries, k: int, p: int) -> float:
    """Mean fraction of the true k nearest neighbors that the bucketed search returns."""
    ds = Dataset(idx.points)
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    hits = 0
    for q in queries:
        approx = approx_knn(idx, q, k, p).ids
        exact = exact_knn(ds, q, k).ids
        hits += len(np.intersect1d(approx, exact))
    return hits / (k * len(queries))


def write_bucket_dump(idx: BucketIndex, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["point_id", "projection", "bucket"])
        for i in range(idx.n):
            w.writerow([i, repr(float(idx.projections[i])), int(idx.point_bucket[i])])
