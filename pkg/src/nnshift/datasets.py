"""Benchmark datasets: the bundled Hepta fixture, external files and seeded surrogates.

Only Hepta ships with the package. R15, Aggregation and S3 are read from
``$NNSHIFT_DATA_DIR`` when present (``R15.txt``, ``Aggregation.txt``,
``s3.txt`` with the label in the last column, whitespace or comma
separated). Otherwise a seeded synthetic stand-in with the same size,
dimension and cluster count is generated; these are surrogates, not the
original point sets.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .core import DataError, Dataset
from .io import load_csv


@dataclass(frozen=True)
class Benchmark:
    name: str
    dataset: Dataset
    source: str  # "fixture", "file" or "surrogate"


def load_hepta() -> Dataset:
    with resources.as_file(resources.files("nnshift") / "data" / "hepta.csv") as p:
        return load_csv(p, has_header=True, label_column="label")


def gaussian_mixture(n: int, d: int, components: int, seed: int = 0,
                     sigma: float = 0.05, box: float = 1.0) -> Dataset:
    """Isotropic Gaussian blobs with uniformly placed centers; labels are component ids."""
    if n < 1 or d < 1 or components < 1:
        raise DataError("need n, d, components >= 1")
    rng = np.random.default_rng(seed)
    centers = rng.random((components, d)) * box
    truth = rng.integers(components, size=n)
    pts = centers[truth] + rng.standard_normal((n, d)) * sigma
    return Dataset(pts, truth)


def r15_surrogate(seed: int = 0) -> Dataset:
    """15 Gaussian clusters of 40 points: a center blob, an inner ring of 7, an outer ring of 7."""
    rng = np.random.default_rng(seed)
    ang = 2 * np.pi * np.arange(7) / 7
    inner = np.c_[1.8 * np.cos(ang), 1.8 * np.sin(ang)]
    outer = np.c_[6.0 * np.cos(ang + np.pi / 7), 6.0 * np.sin(ang + np.pi / 7)]
    centers = np.vstack([[0.0, 0.0], inner, outer]) + 10.0
    truth = np.repeat(np.arange(15), 40)
    pts = centers[truth] + rng.standard_normal((600, 2)) * 0.3
    return Dataset(pts, truth)


def _ellipse(rng, n, cx, cy, rx, ry):
    r = np.sqrt(rng.random(n))
    t = rng.random(n) * 2 * np.pi
    return np.c_[cx + rx * r * np.cos(t), cy + ry * r * np.sin(t)]


def _segment(rng, n, a, b, width):
    t = rng.random(n)[:, None]
    a, b = np.asarray(a, float), np.asarray(b, float)
    return a + t * (b - a) + rng.standard_normal((n, 2)) * width


def aggregation_surrogate(seed: int = 0) -> Dataset:
    """Seven uniform-density blobs (788 points), two pairs joined by thin bridges."""
    rng = np.random.default_rng(seed)
    parts = [
        _ellipse(rng, 45, 9.0, 22.5, 2.2, 2.8),
        np.vstack([_ellipse(rng, 160, 10.5, 10.0, 4.0, 4.5),
                   _segment(rng, 10, (14.5, 10.0), (17.2, 10.0), 0.15)]),
        _ellipse(rng, 102, 21.0, 8.5, 3.2, 3.6),
        _ellipse(rng, 273, 32.0, 9.0, 4.8, 6.0),
        np.vstack([_ellipse(rng, 30, 20.0, 23.5, 1.6, 1.6),
                   _segment(rng, 4, (21.6, 23.5), (22.8, 23.5), 0.12)]),
        _ellipse(rng, 130, 32.0, 22.5, 4.0, 4.2),
        _ellipse(rng, 34, 24.8, 23.5, 1.8, 1.8),
    ]
    truth = np.concatenate([np.full(len(p), i) for i, p in enumerate(parts)])
    return Dataset(np.vstack(parts), truth)


def s3_surrogate(seed: int = 0) -> Dataset:
    """5000 points from 15 strongly overlapping 2-D Gaussians."""
    rng = np.random.default_rng(seed)
    centers = rng.random((15, 2)) * 8e5 + 1e5
    # push centers apart so each component keeps a distinct mode
    for _ in range(200):
        diff = centers[:, None, :] - centers[None, :, :]
        dist = np.sqrt((diff ** 2).sum(-1)) + np.eye(15) * 1e9
        i, j = np.unravel_index(dist.argmin(), dist.shape)
        if dist[i, j] > 1.6e5:
            break
        centers[i] += diff[i, j] / dist[i, j] * 2e4
    truth = rng.integers(15, size=5000)
    scale = rng.uniform(0.7, 1.3, size=(15, 2)) * 4.5e4
    pts = centers[truth] + rng.standard_normal((5000, 2)) * scale[truth]
    return Dataset(pts, truth)


_FILES = {"r15": "R15", "aggregation": "Aggregation", "s3": "s3"}
_SURROGATES = {"r15": r15_surrogate, "aggregation": aggregation_surrogate, "s3": s3_surrogate}


def _find_file(name: str) -> Path | None:
    root = os.environ.get("NNSHIFT_DATA_DIR")
    if not root:
        return None
    stem = _FILES[name]
    for cand in (stem, stem.lower()):
        for ext in (".txt", ".csv"):
            p = Path(root) / (cand + ext)
            if p.exists():
                return p
    return None


def load_benchmark(name: str, seed: int = 0) -> Benchmark:
    """Hepta from the fixture; R15, Aggregation, S3 from file if available, else surrogate."""
    key = name.lower()
    if key == "hepta":
        return Benchmark("hepta", load_hepta(), "fixture")
    if key not in _FILES:
        raise DataError(f"unknown benchmark {name!r}")
    path = _find_file(key)
    if path is not None:
        delim = "," if path.suffix == ".csv" else None
        return Benchmark(key, load_csv(path, label_column=-1, delimiter=delim), "file")
    return Benchmark(key, _SURROGATES[key](seed), "surrogate")


# Ascent and epsilon-proximity settings used when reproducing the reference
# scores. k1 accompanies the reported scores; eps_knn and m1 are the
# post-ascent labeling parameters.
REFERENCE_SETTINGS = {
    "hepta": dict(k1=20, eps_knn=20, m1=4, nmi=0.97, rand=0.98),
    "r15": dict(k1=20, eps_knn=5, m1=8, nmi=0.91, rand=0.98),
    "aggregation": dict(k1=50, eps_knn=30, m1=8, nmi=0.97, rand=0.98),
}
