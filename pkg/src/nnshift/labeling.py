"""Epsilon-proximity cluster labeling.

Points closer than ``eps2`` (transitively) share a cluster. The
partitioned variant labels each LSH bucket on its own, then links
clusters of adjacent buckets that share at least ``k3`` close point pairs
and takes connected components of the resulting cluster graph.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .core import DataError, Dataset, InvariantError
from .lsh import BucketIndex, build_hasher, build_index, reservoir_table
from .parallel import map_ordered, run_chunked

log = logging.getLogger(__name__)

BUCKET_SIZE_RANGE = (500, 2000)


@dataclass(frozen=True)
class Clustering:
    """One integer label per point.

    Cluster ids are contiguous from 0. Noise points (DBSCAN only) carry the
    label -1 and are flagged in ``noise``.
    """

    labels: np.ndarray
    noise: Optional[np.ndarray] = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if self.noise is None and np.any(labels < 0):
            object.__setattr__(self, "noise", labels < 0)

    def __len__(self):
        return len(self.labels)

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if np.any(self.labels >= 0) else 0

    @property
    def n_noise(self) -> int:
        return 0 if self.noise is None else int(self.noise.sum())

    def metric_labels(self) -> np.ndarray:
        """Labels with every noise point promoted to its own singleton cluster."""
        out = self.labels.copy()
        mask = out < 0
        out[mask] = self.n_clusters + np.arange(mask.sum())
        return out


def relabel_by_first_member(labels) -> np.ndarray:
    """Renumber labels 0..C-1 in order of each cluster's smallest point id.

    Negative labels (noise) are left untouched.
    """
    labels = np.asarray(labels, dtype=np.int64)
    out = labels.copy()
    keep = labels >= 0
    _, first, inv = np.unique(labels[keep], return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    out[keep] = rank[inv.ravel()]
    return out


@dataclass(frozen=True)
class EpsParams:
    eps2: Optional[float] = None
    eps_knn: int = 10
    k3: int = 1
    m1: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.eps2 is not None and not self.eps2 >= 0:
            raise DataError("eps2 must be non-negative")
        if self.eps_knn < 1 or self.k3 < 1 or self.m1 < 1:
            raise DataError("need eps_knn >= 1, k3 >= 1, m1 >= 1")


class UnionFind:
    """Disjoint sets over 0..n-1 with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


@dataclass
class ClusterGraph:
    """Bucket-local clusters as vertices, cross-bucket links as edges."""

    vertices: list = field(default_factory=list)
    edges: list = field(default_factory=list)

    def components(self) -> np.ndarray:
        uf = UnionFind(len(self.vertices))
        for a, b in self.edges:
            uf.union(a, b)
        return np.array([uf.find(v) for v in range(len(self.vertices))], dtype=np.int64)


def estimate_epsilon(ds: Dataset, eps_knn: int, m1: int = 1, p: int = 1, seed: int = 0,
                     workers: int | None = None, index: BucketIndex | None = None) -> float:
    """Average distance from each point to its ``eps_knn`` bucketed nearest neighbors.

    A point never counts as its own neighbor.
    """
    if eps_knn >= ds.n:
        raise DataError(f"eps_knn={eps_knn} needs more than {ds.n} points")
    if index is None:
        index = build_index(build_hasher(ds.dim, seed), ds, m1)
    table = reservoir_table(index, p, eps_knn + 1)
    out = np.empty(ds.n)
    pts = np.ascontiguousarray(ds.points)

    def work(s, e):
        _kernels.mean_knn_distance_range(s, e, pts, index.point_bucket, table.ptr,
                                         table.pts, table.ids, eps_knn, out)

    run_chunked(work, ds.n, workers)
    return float(out.mean())


def local_eps_proximity(points, eps2: float) -> Clustering:
    if eps2 < 0:
        raise DataError("eps2 must be non-negative")
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.shape[0] == 0:
        return Clustering(np.zeros(0, dtype=np.int64))
    return Clustering(_kernels.eps_components(pts, float(eps2)))


def _link_adjacent(points, bucket_ids, local_labels, j, eps2, k3):
    a_ids, b_ids = bucket_ids[j], bucket_ids[j + 1]
    if len(a_ids) == 0 or len(b_ids) == 0:
        return []
    nb = int(local_labels[j + 1].max()) + 1
    codes, counts = _kernels.cross_pair_codes(
        np.ascontiguousarray(points[a_ids]), local_labels[j],
        np.ascontiguousarray(points[b_ids]), local_labels[j + 1], nb, float(eps2))
    hits = codes[counts >= k3]
    return sorted((int(c // nb), int(c % nb)) for c in hits)


def merge_bucket_clusters(points, bucket_ids, local_labels, eps2: float, k3: int = 1,
                          workers: int | None = None) -> tuple[Clustering, ClusterGraph]:
    """Join bucket-local clusterings into one global labeling.

    ``bucket_ids[j]`` lists the point ids of bucket ``j`` (buckets in order)
    and ``local_labels[j]`` their labels within that bucket. Two clusters of
    neighboring buckets merge when at least ``k3`` of their cross pairs lie
    within ``eps2``.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    graph = ClusterGraph()
    offsets = []
    for j, lab in enumerate(local_labels):
        offsets.append(len(graph.vertices))
        c = int(lab.max()) + 1 if len(lab) else 0
        graph.vertices.extend((j, i) for i in range(c))

    pairs = map_ordered(
        lambda j: _link_adjacent(points, bucket_ids, local_labels, j, eps2, k3),
        range(len(bucket_ids) - 1), workers)
    for j, links in enumerate(pairs):
        graph.edges.extend((offsets[j] + a, offsets[j + 1] + b) for a, b in links)

    comp = graph.components()
    labels = np.full(points.shape[0], -1, dtype=np.int64)
    for j, (ids, lab) in enumerate(zip(bucket_ids, local_labels)):
        labels[ids] = comp[offsets[j] + lab]
    if np.any(labels < 0):
        raise InvariantError("some points were not labeled by any bucket")
    return Clustering(relabel_by_first_member(labels)), graph


def partitioned_labeling(ds: Dataset, params: EpsParams, p: int = 1, workers: int | None = None
                         ) -> tuple[Clustering, ClusterGraph, BucketIndex, float]:
    """Bucketed epsilon-proximity; returns labels, cluster graph, index and the eps used."""
    index = build_index(build_hasher(ds.dim, params.seed), ds, params.m1)
    eps2 = params.eps2
    if eps2 is None:
        eps2 = estimate_epsilon(ds, params.eps_knn, params.m1, p, params.seed,
                                workers, index=index)
    bucket_ids = [np.sort(b) for b in index.buckets]
    local = map_ordered(lambda ids: local_eps_proximity(ds.points[ids], eps2).labels,
                        bucket_ids, workers)
    clustering, graph = merge_bucket_clusters(ds.points, bucket_ids, local, eps2,
                                              params.k3, workers)
    return clustering, graph, index, eps2


def eps_proximity_partitioned(ds: Dataset, params: EpsParams, p: int = 1,
                              workers: int | None = None) -> Clustering:
    return partitioned_labeling(ds, params, p, workers)[0]


def prototype_labeling(result, tol: float) -> Clustering:
    """Give one label to all candidates whose prototypes coincide within ``tol``."""
    protos = getattr(result, "prototypes", result)
    return local_eps_proximity(protos, tol)


def bucket_size_warnings(sizes, lo: int = BUCKET_SIZE_RANGE[0],
                         hi: int = BUCKET_SIZE_RANGE[1]) -> list[str]:
    """Messages for buckets whose size falls outside the advised range."""
    sizes = np.asarray(sizes)
    out = []
    big = np.flatnonzero(sizes > hi)
    small = np.flatnonzero(sizes < lo)
    if len(big):
        out.append(f"{len(big)} bucket(s) hold more than {hi} points (max {int(sizes.max())}); "
                   "consider more buckets")
    if len(small):
        out.append(f"{len(small)} bucket(s) hold fewer than {lo} points (min {int(sizes.min())}); "
                   "consider fewer buckets")
    return out


def write_graph_dump(graph: ClusterGraph, clustering: Clustering, bucket_ids, local_labels,
                     path) -> None:
    # global label of a vertex is the label of any of its member points
    vertex_label = {}
    for j, (ids, lab) in enumerate(zip(bucket_ids, local_labels)):
        for pid, l in zip(ids, lab):
            vertex_label.setdefault((j, int(l)), int(clustering.labels[pid]))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bucket", "local_cluster", "global_label"])
        for v in graph.vertices:
            w.writerow([v[0], v[1], vertex_label.get(v, -1)])
