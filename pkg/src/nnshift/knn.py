"""Brute-force exact k-nearest-neighbor search.

This is deliberately the simplest possible implementation: one linear scan
per query, no index. It serves the exact gradient ascent and is the oracle
the bucketed search is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataError, Dataset


@dataclass(frozen=True)
class NeighborList:
    ids: np.ndarray
    distances: np.ndarray

    def __len__(self):
        return len(self.ids)


def exact_knn(ds: Dataset, x, k: int) -> NeighborList:
    """Return the ``k`` points of ``ds`` closest to ``x``.

    Ties in distance go to the lower point id. A query that is itself a
    sample point is its own first neighbor.
    """
    if k < 1:
        raise DataError("k must be positive")
    if k > ds.n:
        raise DataError("k exceeds dataset size")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (ds.dim,):
        raise DataError(f"query has shape {x.shape}, dataset dim is {ds.dim}")
    sq = ((ds.points - x) ** 2).sum(axis=1)
    order = np.lexsort((np.arange(ds.n), sq))[:k]
    return NeighborList(order, np.sqrt(sq[order]))
