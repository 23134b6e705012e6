"""Reference labelers: Lloyd k-means and DBSCAN."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import DataError, Dataset
from .labeling import Clustering, relabel_by_first_member


@dataclass(frozen=True)
class KMeansParams:
    k: int
    max_iters: int = 300
    seed: int = 0
    init: str = "random"

    def __post_init__(self):
        if self.k < 1 or self.max_iters < 1:
            raise DataError("need k >= 1 and max_iters >= 1")
        if self.init not in ("random", "k-means++"):
            raise DataError(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class DbscanParams:
    eps: float
    min_pts: int

    def __post_init__(self):
        if not self.eps > 0 or self.min_pts < 1:
            raise DataError("need eps > 0 and min_pts >= 1")


@dataclass
class KMeansResult:
    clustering: Clustering
    centers: np.ndarray
    inertia_trace: list
    iterations: int


def _sq_dists(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def _init_centers(X, params, rng):
    n = X.shape[0]
    if params.init == "random":
        return X[rng.choice(n, params.k, replace=False)].copy()
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, params.k):
        total = d2.sum()
        i = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
        centers.append(X[i])
        d2 = np.minimum(d2, ((X - X[i]) ** 2).sum(axis=1))
    return np.array(centers)


def kmeans_fit(ds: Dataset, params: KMeansParams) -> KMeansResult:
    """Lloyd iterations from ``k`` distinct sample points chosen by seed.

    Stops once assignments stop changing. A center left without points is
    moved onto the point farthest from its own center.
    """
    X = ds.points
    n = X.shape[0]
    if params.k > n:
        raise DataError(f"k={params.k} exceeds dataset size {n}")
    rng = np.random.default_rng(params.seed)
    centers = _init_centers(X, params, rng)
    assign = None
    trace = []
    it = 0
    for it in range(1, params.max_iters + 1):
        d2 = _sq_dists(X, centers)
        # argmin returns the first minimum, i.e. ties go to the lower center index
        new = d2.argmin(axis=1)
        trace.append(float(d2[np.arange(n), new].sum()))
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        own = d2[np.arange(n), assign]
        for c in range(params.k):
            members = assign == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
            else:
                far = int(own.argmax())
                centers[c] = X[far]
                assign[far] = c
                own[far] = 0.0
    d2 = _sq_dists(X, centers)
    final = d2.argmin(axis=1)
    return KMeansResult(Clustering(relabel_by_first_member(final)), centers, trace, it)


def kmeans(ds: Dataset, params: KMeansParams) -> Clustering:
    return kmeans_fit(ds, params).clustering


def dbscan(ds: Dataset, params: DbscanParams) -> Clustering:
    """Density-based clustering; a point counts itself toward ``min_pts``.

    Clusters are grown from core points in index order. A border point joins
    the first cluster that reaches it. Unreached points are noise (-1).
    """
    X = ds.points
    n = X.shape[0]
    tree = cKDTree(X)
    hoods = tree.query_ball_point(X, r=params.eps)
    core = np.array([len(h) >= params.min_pts for h in hoods], dtype=bool)
    labels = np.full(n, -1, dtype=np.int64)
    cid = 0
    for i in range(n):
        if not core[i] or labels[i] >= 0:
            continue
        labels[i] = cid
        stack = [i]
        while stack:
            q = stack.pop()
            for r in sorted(hoods[q]):
                if labels[r] >= 0:
                    continue
                labels[r] = cid
                if core[r]:
                    stack.append(r)
        cid += 1
    return Clustering(relabel_by_first_member(labels), labels < 0)
