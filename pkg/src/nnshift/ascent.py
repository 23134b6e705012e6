"""Nearest-neighbor mean shift: exact and bucketed gradient ascent.

Each candidate is moved repeatedly to the mean of its ``k1`` nearest
sample points until a shift is no longer than ``eps1`` or ``j_max`` shifts
have been applied. The exact variant scans the whole sample; the bucketed
variant only scans the reservoir of the candidate's current LSH bucket and
lets the candidate migrate between buckets by majority vote.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .core import DataError, Dataset
from .knn import exact_knn
from .lsh import BucketIndex, build_hasher, build_index, hash_points, reservoir_table
from .parallel import run_chunked


@dataclass(frozen=True)
class AscentParams:
    k1: int = 20
    eps1: float = 1e-5
    j_max: int = 15
    m1: int = 1
    p: int = 1
    k2: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.k2 is None:
            object.__setattr__(self, "k2", self.k1)
        if self.k1 < 1 or self.k2 < 1:
            raise DataError("k1 and k2 must be at least 1")
        if not self.eps1 > 0:
            raise DataError("eps1 must be positive")
        if self.j_max < 1 or self.m1 < 1 or self.p < 0:
            raise DataError("need j_max >= 1, m1 >= 1, p >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AscentResult:
    prototypes: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    bucket_trace: Optional[list] = None
    index: Optional[BucketIndex] = None

    def __len__(self):
        return self.prototypes.shape[0]


def mean_shift_step(neighbors) -> np.ndarray:
    nb = np.asarray(neighbors, dtype=np.float64)
    if nb.size == 0:
        raise DataError("cannot shift to the mean of no neighbors")
    if nb.ndim == 1:
        nb = nb.reshape(-1, 1)
    # running sum in neighbor order, matching the compiled kernel bit for bit
    return np.cumsum(nb, axis=0)[-1] / nb.shape[0]


def _candidates(ds: Dataset, candidates) -> np.ndarray:
    if candidates is None:
        return np.array(ds.points)
    c = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    if ds.dim == 1 and c.shape[0] == 1 and c.shape[1] != 1:
        c = c.reshape(-1, 1)
    if c.shape[1] != ds.dim:
        raise DataError(f"candidates have dimension {c.shape[1]}, sample has {ds.dim}")
    return np.ascontiguousarray(c)


def nnga_exact(ds: Dataset, candidates=None, params: AscentParams = AscentParams()) -> AscentResult:
    """Mean shift with exact nearest neighbors from a linear scan."""
    if params.k1 > ds.n:
        raise DataError("k1 exceeds dataset size")
    cands = _candidates(ds, candidates)
    m = cands.shape[0]
    protos = np.empty_like(cands)
    iters = np.zeros(m, dtype=np.int64)
    conv = np.zeros(m, dtype=bool)
    for c in range(m):
        x = cands[c]
        j = 0
        while True:
            xn = mean_shift_step(ds.points[exact_knn(ds, x, params.k1).ids])
            step = np.sqrt(np.sum((xn - x) ** 2))
            x = xn
            j += 1
            if step <= params.eps1:
                conv[c] = True
                break
            if j >= params.j_max:
                break
        protos[c] = x
        iters[c] = j
    return AscentResult(protos, iters, conv)


def nnga_plus(ds: Dataset, candidates=None, params: AscentParams = AscentParams(),
              workers: int | None = None, trace: bool = False,
              index: BucketIndex | None = None) -> AscentResult:
    """Mean shift with neighbors drawn from LSH bucket reservoirs.

    The index is built once from the sample with ``params.m1`` buckets and
    ``params.seed``; pass ``index`` to reuse one. Candidates start in the
    bucket their own position hashes to.
    """
    if params.k1 > ds.n or params.k2 > ds.n:
        raise DataError("k1 and k2 must not exceed dataset size")
    cands = _candidates(ds, candidates)
    if index is None:
        index = build_index(build_hasher(ds.dim, params.seed), ds, params.m1)
    table = reservoir_table(index, params.p, params.k1)
    m, d = cands.shape
    start = hash_points(index, cands)
    out = np.empty((m, d))
    iters = np.zeros(m, dtype=np.int64)
    conv = np.zeros(m, dtype=np.bool_)
    tr = np.full((m, params.j_max + 1) if trace else (m, 0), -1, dtype=np.int64)
    tr_len = np.zeros(m, dtype=np.int64)
    pts = np.ascontiguousarray(ds.points)

    def work(s, e):
        _kernels.ascend_range(s, e, cands, start, pts, index.point_bucket,
                              table.ptr, table.pts, table.ids,
                              params.k1, params.k2, float(params.eps1), params.j_max,
                              out, iters, conv, tr, tr_len)

    run_chunked(work, m, workers)
    bucket_trace = [tr[i, :tr_len[i]].tolist() for i in range(m)] if trace else None
    return AscentResult(out, iters, conv, bucket_trace, index)
