"""External clustering indices: NMI and the (unadjusted) RAND index.

Both accept a ``Clustering`` or a plain label sequence. Noise points
(label -1) count as singleton clusters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataError


def _labels(c) -> np.ndarray:
    if hasattr(c, "metric_labels"):
        return c.metric_labels()
    lab = np.asarray(c, dtype=np.int64).copy()
    mask = lab < 0
    if mask.any():
        lab[mask] = lab.max() + 1 + np.arange(mask.sum())
    return lab


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def rows(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def cols(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def contingency(a, b) -> ContingencyTable:
    la, lb = _labels(a), _labels(b)
    if la.shape != lb.shape:
        raise DataError(f"label lengths differ: {la.size} vs {lb.size}")
    _, ia = np.unique(la, return_inverse=True)
    _, ib = np.unique(lb, return_inverse=True)
    ia, ib = ia.ravel(), ib.ravel()
    counts = np.zeros((ia.max() + 1 if ia.size else 0, ib.max() + 1 if ib.size else 0),
                      dtype=np.int64)
    np.add.at(counts, (ia, ib), 1)
    return ContingencyTable(counts)


def _entropy(marginal, n) -> float:
    p = marginal[marginal > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(a, b) -> float:
    """Mutual information over the geometric mean of the two entropies."""
    t = contingency(a, b)
    n = t.n
    if n == 0:
        raise DataError("need at least one point")
    ha, hb = _entropy(t.rows, n), _entropy(t.cols, n)
    if ha == 0 and hb == 0:
        return 1.0
    if ha == 0 or hb == 0:
        return 0.0
    nz = t.counts > 0
    pij = t.counts[nz] / n
    outer = np.outer(t.rows, t.cols)[nz] / (n * n)
    mi = float((pij * np.log(pij / outer)).sum())
    return min(1.0, max(0.0, mi / np.sqrt(ha * hb)))


def rand_index(a, b) -> float:
    t = contingency(a, b)
    n = t.n
    if n < 2:
        raise DataError("RAND index needs at least two points")
    pairs = n * (n - 1) / 2

    def comb2(x):
        x = x.astype(np.float64)
        return (x * (x - 1) / 2).sum()

    same_both = comb2(t.counts)
    same_a = comb2(t.rows)
    same_b = comb2(t.cols)
    # agreeing pairs: together in both, or apart in both
    agree = pairs + 2 * same_both - same_a - same_b
    return float(agree / pairs)
