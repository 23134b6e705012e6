"""End-to-end runs: load, normalize, optional ascent, label, score, write.

Also hosts the timing sweep used by ``nnshift bench``.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .ascent import AscentParams, nnga_exact, nnga_plus
from .baselines import DbscanParams, KMeansParams, dbscan, kmeans
from .core import DataError, Dataset, InvariantError, min_max_normalize
from .datasets import gaussian_mixture, load_benchmark
from .io import load_csv, read_prototypes_csv, write_labels_csv, write_prototypes_csv
from .labeling import (EpsParams, bucket_size_warnings, estimate_epsilon,
                       partitioned_labeling, prototype_labeling, write_graph_dump)
from .metrics import nmi, rand_index
from .parallel import default_workers

log = logging.getLogger(__name__)

ALGORITHMS = ("nnga", "nnga_plus", "eps", "kmeans", "dbscan", "pipeline")
LABELERS = ("eps", "kmeans", "dbscan")
TIMING_COLUMNS = ("n", "m1", "p", "workers", "phase", "ms")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class PipelineConfig:
    """Everything needed to reproduce one run.

    ``algorithm`` picks what runs on the normalized data:

    * ``nnga`` / ``nnga_plus``: exact or bucketed ascent; candidates whose
      prototypes coincide within ``proto_tol`` share a label.
    * ``eps`` / ``kmeans`` / ``dbscan``: the labeler alone.
    * ``pipeline``: bucketed ascent, then ``labeler`` on the prototypes.

    ``input_format="prototypes"`` reads the coordinates of a prototypes
    file; pair it with ``normalize=False`` to keep them in the space they
    were computed in. ``label_m1`` sets the epsilon labeling buckets
    (default ``m1``). An unset ``eps2`` is estimated from ``eps_knn``
    neighbors on the normalized input, searching ``label_p`` layers.
    """

    input: Optional[str] = None
    benchmark: Optional[str] = None
    has_header: bool = False
    label_column: Optional[object] = None
    input_format: str = "csv"
    normalize: bool = True
    algorithm: str = "pipeline"
    labeler: str = "eps"
    k1: int = 20
    eps1: float = 1e-5
    j_max: int = 15
    m1: int = 1
    p: int = 1
    k2: Optional[int] = None
    eps2: Optional[float] = None
    eps_knn: int = 10
    k3: int = 1
    label_m1: Optional[int] = None
    label_p: int = 1
    proto_tol: float = 1e-3
    k: Optional[int] = None
    max_iters: int = 300
    kmeans_init: str = "random"
    dbscan_eps: Optional[float] = None
    min_pts: int = 5
    seed: int = 0
    workers: Optional[int] = None
    labels_out: Optional[str] = None
    report_out: Optional[str] = None
    prototypes_out: Optional[str] = None
    graph_out: Optional[str] = None
    plot_out: Optional[str] = None

    def __post_init__(self):
        if (self.input is None) == (self.benchmark is None):
            raise ConfigError("give exactly one of input or benchmark")
        if self.input_format not in ("csv", "prototypes"):
            raise ConfigError("input_format must be csv or prototypes")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {', '.join(ALGORITHMS)}")
        if self.labeler not in LABELERS:
            raise ConfigError(f"labeler must be one of {', '.join(LABELERS)}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not self.proto_tol >= 0 or self.label_p < 0:
            raise ConfigError("need proto_tol >= 0 and label_p >= 0")
        try:
            if self.uses_ascent:
                self.ascent_params()
            which = self.labeler if self.algorithm == "pipeline" else self.algorithm
            if which == "eps":
                self.eps_params()
            elif which == "kmeans":
                self.kmeans_params()
            elif which == "dbscan":
                self.dbscan_params()
        except DataError as e:
            raise ConfigError(str(e)) from None

    @property
    def uses_ascent(self) -> bool:
        return self.algorithm in ("nnga", "nnga_plus", "pipeline")

    def ascent_params(self) -> AscentParams:
        return AscentParams(self.k1, self.eps1, self.j_max, self.m1, self.p, self.k2, self.seed)

    def eps_params(self, eps2: float | None = None) -> EpsParams:
        return EpsParams(self.eps2 if eps2 is None else eps2, self.eps_knn, self.k3,
                         self.label_m1 or self.m1, self.seed)

    def kmeans_params(self) -> KMeansParams:
        if self.k is None:
            raise ConfigError("kmeans needs k")
        return KMeansParams(self.k, self.max_iters, self.seed, self.kmeans_init)

    def dbscan_params(self) -> DbscanParams:
        if self.dbscan_eps is None:
            raise ConfigError("dbscan needs dbscan_eps")
        return DbscanParams(self.dbscan_eps, self.min_pts)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        extra = sorted(set(d) - known)
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(extra)}")
        return cls(**d)


@dataclass
class RunReport:
    times_ms: dict
    n: int
    d: int
    m1: int
    bucket_sizes: dict
    n_clusters: int
    n_noise: int
    nmi: Optional[float]
    rand: Optional[float]
    seed: int
    eps2: Optional[float]
    source: str
    warnings: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


@contextmanager
def _phase(name: str, times: dict):
    t0 = time.perf_counter()
    try:
        yield
    except (DataError, InvariantError, ConfigError) as e:
        raise type(e)(f"{name}: {e}") from e
    finally:
        times[name] = times.get(name, 0.0) + (time.perf_counter() - t0) * 1e3


def _load(cfg: PipelineConfig) -> tuple[Dataset, str]:
    if cfg.benchmark is not None:
        b = load_benchmark(cfg.benchmark, cfg.seed)
        return b.dataset, f"{b.name} ({b.source})"
    if cfg.input_format == "prototypes":
        return read_prototypes_csv(cfg.input), cfg.input
    return load_csv(cfg.input, cfg.has_header, cfg.label_column), cfg.input


def _label(ds: Dataset, cfg: PipelineConfig, which: str, eps2, workers, sizes: dict):
    if which == "kmeans":
        return kmeans(ds, cfg.kmeans_params()), None, eps2
    if which == "dbscan":
        return dbscan(ds, cfg.dbscan_params()), None, eps2
    clustering, graph, index, eps2 = partitioned_labeling(ds, cfg.eps_params(eps2),
                                                          cfg.label_p, workers)
    sizes["labeling"] = index.bucket_sizes().tolist()
    return clustering, (graph, index), eps2


def run_pipeline(cfg: PipelineConfig) -> RunReport:
    """Run the configured algorithm and write whichever outputs are configured.

    The labels file depends only on the configuration, never on the worker
    count. Errors are re-raised with the failing phase's name prefixed.
    """
    times: dict = {}
    workers = cfg.workers or default_workers()
    sizes: dict = {}
    with _phase("load", times):
        ds, source = _load(cfg)
    with _phase("normalize", times):
        norm = min_max_normalize(ds)[0] if cfg.normalize else ds

    eps2 = cfg.eps2
    result = None
    work = norm
    if cfg.uses_ascent:
        if cfg.algorithm == "pipeline" and cfg.labeler == "eps" and eps2 is None:
            # radius comes from the input density; prototypes pile up on modes
            with _phase("eps_estimate", times):
                lp = cfg.eps_params()
                eps2 = estimate_epsilon(norm, lp.eps_knn, lp.m1, cfg.label_p, lp.seed, workers)
        with _phase("ascent", times):
            if cfg.algorithm == "nnga":
                result = nnga_exact(norm, None, cfg.ascent_params())
            else:
                result = nnga_plus(norm, None, cfg.ascent_params(), workers=workers)
                sizes["ascent"] = result.index.bucket_sizes().tolist()
        work = Dataset(result.prototypes, norm.truth)

    extra = None
    with _phase("label", times):
        if cfg.algorithm in ("nnga", "nnga_plus"):
            clustering = prototype_labeling(result, cfg.proto_tol)
        else:
            which = cfg.labeler if cfg.algorithm == "pipeline" else cfg.algorithm
            clustering, extra, eps2 = _label(work, cfg, which, eps2, workers, sizes)

    score_nmi = score_rand = None
    if ds.truth is not None:
        with _phase("metrics", times):
            score_nmi = nmi(ds.truth, clustering)
            score_rand = rand_index(ds.truth, clustering) if ds.n > 1 else None

    warnings = []
    for name, s in sizes.items():
        warnings += [f"{name} buckets: {w}" for w in bucket_size_warnings(s)]
    for w in warnings:
        log.warning(w)

    with _phase("write", times):
        if cfg.labels_out:
            write_labels_csv(clustering, cfg.labels_out)
        if cfg.prototypes_out and result is not None:
            write_prototypes_csv(result, cfg.prototypes_out)
        if cfg.graph_out and extra is not None:
            graph, index = extra
            bucket_ids = [np.sort(b) for b in index.buckets]
            local = _local_labels(work, bucket_ids, eps2)
            write_graph_dump(graph, clustering, bucket_ids, local, cfg.graph_out)
        if cfg.plot_out:
            from .plotting import plot_clusters
            plot_clusters(norm.points, clustering.labels, cfg.plot_out,
                          title=f"{cfg.algorithm}: {clustering.n_clusters} clusters")

    m1 = cfg.m1 if cfg.uses_ascent else (cfg.label_m1 or cfg.m1)
    report = RunReport(
        times_ms={k: round(v, 3) for k, v in times.items()},
        n=ds.n, d=ds.dim, m1=m1, bucket_sizes=sizes,
        n_clusters=clustering.n_clusters, n_noise=clustering.n_noise,
        nmi=score_nmi, rand=score_rand, seed=cfg.seed,
        eps2=None if eps2 is None else float(eps2), source=source,
        warnings=warnings, params=cfg.to_dict())
    if cfg.report_out:
        report.write(cfg.report_out)
    return report


def _local_labels(ds: Dataset, bucket_ids, eps2):
    from .labeling import local_eps_proximity
    return [local_eps_proximity(ds.points[ids], eps2).labels for ids in bucket_ids]


def bench(ns, m1s=None, ps=(1,), workers=(1,), points_per_bucket: int | None = None,
          d: int = 3, components: int = 10, k1: int = 20, j_max: int = 15,
          eps_knn: int = 10, repeats: int = 1, seed: int = 0, label: bool = True) -> list[dict]:
    """Time bucketed ascent (and optionally labeling) over a parameter grid.

    Data are seeded Gaussian mixtures. Either list ``m1s`` explicitly or
    set ``points_per_bucket`` to derive ``m1 = n // points_per_bucket``.
    Returns one row per (n, m1, p, workers, phase, repeat).
    """
    if (m1s is None) == (points_per_bucket is None):
        raise ConfigError("give exactly one of m1s or points_per_bucket")
    rows = []
    for n in ns:
        ds = min_max_normalize(gaussian_mixture(n, d, components, seed))[0]
        grid = m1s if m1s is not None else [max(1, n // points_per_bucket)]
        for m1 in grid:
            for p in ps:
                for w in workers:
                    for _ in range(repeats):
                        params = AscentParams(k1=k1, j_max=j_max, m1=m1, p=p, seed=seed)
                        t0 = time.perf_counter()
                        res = nnga_plus(ds, None, params, workers=w)
                        t1 = time.perf_counter()
                        rows.append(dict(n=n, m1=m1, p=p, workers=w, phase="ascent",
                                         ms=(t1 - t0) * 1e3))
                        if label:
                            t0 = time.perf_counter()
                            eps2 = estimate_epsilon(ds, eps_knn, m1, p, seed, w)
                            partitioned_labeling(Dataset(res.prototypes),
                                                 EpsParams(eps2=eps2, m1=m1, seed=seed), p, w)
                            t1 = time.perf_counter()
                            rows.append(dict(n=n, m1=m1, p=p, workers=w, phase="label",
                                             ms=(t1 - t0) * 1e3))
    return rows


def write_timing_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=TIMING_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "ms": f"{r['ms']:.3f}"})


def read_timing_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        out = []
        for r in csv.DictReader(fh):
            out.append(dict(n=int(r["n"]), m1=int(r["m1"]), p=int(r["p"]),
                            workers=int(r["workers"]), phase=r["phase"], ms=float(r["ms"])))
        return out
