"""Command-line entry point: ``nnshift <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ascent import AscentParams
from .core import DataError, Dataset, InvariantError, min_max_normalize
from .datasets import gaussian_mixture, load_benchmark
from .io import load_csv, read_labels_csv, write_labels_csv, write_points_csv
from .labeling import EpsParams, bucket_size_warnings
from .lsh import build_hasher, build_index, knn_recall, write_bucket_dump
from .metrics import nmi, rand_index
from .pipeline import (ConfigError, PipelineConfig, bench, run_pipeline,
                       write_timing_csv)

log = logging.getLogger("nnshift")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _opt(p, *names, **kw):
    # absent flags stay out of the namespace so config-file values survive
    p.add_argument(*names, default=argparse.SUPPRESS, **kw)


def _common(p):
    _opt(p, "--config", help="JSON file with config keys; flags override it")
    _opt(p, "--workers", type=int, help="worker threads (default: all cores)")
    _opt(p, "--seed", type=int)


def _input(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("input", nargs="?", default=argparse.SUPPRESS, help="input CSV")
    _opt(g, "--benchmark", help="hepta, r15, aggregation or s3")
    _opt(p, "--header", dest="has_header", action="store_true", help="first row is a header")
    _opt(p, "--label-column", dest="label_column",
         help="ground-truth column (0-based index or header name)")


def _ascent(p):
    _opt(p, "--k1", type=int, help="neighbors averaged per shift")
    _opt(p, "--eps1", type=float, help="stop when a shift is no longer than this")
    _opt(p, "--j-max", dest="j_max", type=int, help="maximum shifts per candidate")
    _opt(p, "--m1", type=int, help="number of LSH buckets")
    _opt(p, "--p", type=int, help="neighbor bucket layers on each side")
    _opt(p, "--k2", type=int, help="neighbors voting on bucket migration (default k1)")


def _labelers(p):
    _opt(p, "--eps2", type=float, help="linking radius (default: estimated)")
    _opt(p, "--eps-knn", dest="eps_knn", type=int, help="neighbors for the radius estimate")
    _opt(p, "--k3", type=int, help="close cross-bucket pairs needed to merge")
    _opt(p, "--label-m1", dest="label_m1", type=int, help="labeling buckets (default m1)")
    _opt(p, "--label-p", dest="label_p", type=int, help="layers for the radius estimate")
    _opt(p, "--k", type=int, help="k-means cluster count")
    _opt(p, "--max-iters", dest="max_iters", type=int)
    _opt(p, "--kmeans-init", dest="kmeans_init", choices=["random", "k-means++"])
    _opt(p, "--dbscan-eps", dest="dbscan_eps", type=float)
    _opt(p, "--min-pts", dest="min_pts", type=int)


def _outputs(p):
    _opt(p, "-o", "--labels-out", dest="labels_out", help="labels CSV (point_id,label)")
    _opt(p, "--report", dest="report_out", help="run report JSON")
    _opt(p, "--plot", dest="plot_out", help="cluster scatter PNG")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="nnshift", description="Nearest-neighbor mean shift clustering.")
    ap.add_argument("--version", action="version", version=f"nnshift {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("normalize", help="min-max normalize a CSV into the unit box")
    _input(p)
    _common(p)
    _opt(p, "-o", "--output", dest="output", help="normalized CSV (stdout if omitted)")
    _opt(p, "--stats-out", dest="stats_out", help="JSON with per-dimension min and max")

    p = sub.add_parser("knn", help="recall of bucketed k-NN against the exact search")
    _input(p)
    _common(p)
    _opt(p, "--synthetic", type=int, help="use an n-point Gaussian mixture instead")
    _opt(p, "--k", type=int, help="neighbors per query (default 10)")
    _opt(p, "--m1", type=int, help="number of buckets (default 1)")
    _opt(p, "--p", type=int, nargs="+", help="layer counts to compare (default 0 1 2)")
    _opt(p, "--queries", type=int, help="sampled query points (default 200)")
    _opt(p, "--buckets-out", dest="buckets_out", help="CSV of point projections and buckets")
    _opt(p, "-o", "--output", dest="output", help="recall CSV (p,recall)")

    p = sub.add_parser("ascend", help="run the mean shift ascent and write prototypes")
    _input(p)
    _common(p)
    _ascent(p)
    _opt(p, "--exact", action="store_true", help="scan the whole sample instead of buckets")
    _opt(p, "--proto-tol", dest="proto_tol", type=float,
         help="prototypes closer than this share a label")
    _opt(p, "--prototypes-out", dest="prototypes_out", help="prototypes CSV")
    _outputs(p)

    p = sub.add_parser("label", help="label points or prototypes with one labeler")
    _input(p)
    _common(p)
    _opt(p, "--labeler", choices=["eps", "kmeans", "dbscan"], help="default eps")
    _opt(p, "--m1", type=int, help="labeling buckets")
    _opt(p, "--prototypes", action="store_true",
         help="input is a prototypes CSV; coordinates are used as is")
    _labelers(p)
    _opt(p, "--graph-out", dest="graph_out", help="cluster graph CSV (eps labeler)")
    _outputs(p)

    p = sub.add_parser("cluster", help="full run: normalize, ascend, label, score")
    _input(p)
    _common(p)
    _opt(p, "--algorithm", choices=["nnga", "nnga_plus", "eps", "kmeans", "dbscan", "pipeline"])
    _opt(p, "--labeler", choices=["eps", "kmeans", "dbscan"])
    _ascent(p)
    _labelers(p)
    _opt(p, "--proto-tol", dest="proto_tol", type=float)
    _opt(p, "--prototypes-out", dest="prototypes_out")
    _opt(p, "--graph-out", dest="graph_out")
    _outputs(p)

    p = sub.add_parser("eval", help="NMI and RAND between two label files")
    p.add_argument("truth", help="reference labels CSV")
    p.add_argument("predicted", help="labels CSV to score")

    p = sub.add_parser("segment", help="segment a binary PPM image")
    p.add_argument("input", help="P6 image")
    _common(p)
    _ascent(p)
    _opt(p, "--eps2", type=float)
    _opt(p, "--eps-knn", dest="eps_knn", type=int)
    _opt(p, "--k3", type=int)
    _opt(p, "--label-m1", dest="label_m1", type=int)
    _opt(p, "--out-image", dest="out_image", help="mean-color PPM")
    _opt(p, "--boundary-out", dest="boundary_out", help="region boundary PGM")
    _opt(p, "-o", "--labels-out", dest="labels_out")
    _opt(p, "--report", dest="report_out")

    p = sub.add_parser("bench", help="timing sweep on synthetic Gaussian mixtures")
    _opt(p, "--config", help="JSON file with sweep keys; flags override it")
    _opt(p, "--n", dest="ns", type=int, nargs="+", help="dataset sizes")
    g = p.add_mutually_exclusive_group()
    _opt(g, "--m1", dest="m1s", type=int, nargs="+", help="bucket counts")
    _opt(g, "--points-per-bucket", dest="points_per_bucket", type=int)
    _opt(p, "--p", dest="ps", type=int, nargs="+")
    _opt(p, "--workers", type=int, nargs="+")
    _opt(p, "--d", type=int)
    _opt(p, "--components", type=int)
    _opt(p, "--k1", type=int)
    _opt(p, "--j-max", dest="j_max", type=int)
    _opt(p, "--repeats", type=int)
    _opt(p, "--seed", type=int)
    _opt(p, "--no-label", dest="label", action="store_false", help="time the ascent only")
    _opt(p, "-o", "--output", dest="output", help="timing CSV; a PNG is written next to it")
    return ap


def _merged(args, drop=("command", "verbose", "config")) -> dict:
    cfg = {}
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: {e}") from None
        if not isinstance(cfg, dict):
            raise ConfigError(f"{path}: expected a JSON object")
    cfg.update({k: v for k, v in vars(args).items() if k not in drop})
    return cfg


def _load_any(cfg: dict) -> Dataset:
    if cfg.get("benchmark"):
        return load_benchmark(cfg["benchmark"], cfg.get("seed", 0)).dataset
    if cfg.get("synthetic"):
        return gaussian_mixture(cfg["synthetic"], 3, 10, cfg.get("seed", 0))
    if not cfg.get("input"):
        raise ConfigError("no input given")
    return load_csv(cfg["input"], cfg.get("has_header", False), cfg.get("label_column"))


def _emit(text: str, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_normalize(args) -> int:
    cfg = _merged(args)
    ds = _load_any(cfg)
    norm, stats = min_max_normalize(ds)
    out = cfg.get("output")
    if out:
        write_points_csv(norm.points, out, norm.truth)
    else:
        write_points_csv(norm.points, "/dev/stdout", norm.truth)
    if cfg.get("stats_out"):
        Path(cfg["stats_out"]).write_text(json.dumps(
            {"min": stats.lo.tolist(), "max": stats.hi.tolist()}, indent=2) + "\n")
    return EXIT_OK


def cmd_knn(args) -> int:
    cfg = _merged(args)
    ds = min_max_normalize(_load_any(cfg))[0]
    k, m1 = cfg.get("k", 10), cfg.get("m1", 1)
    seed = cfg.get("seed", 0)
    rng = np.random.default_rng(seed)
    q = min(cfg.get("queries", 200), ds.n)
    queries = ds.points[rng.choice(ds.n, size=q, replace=False)]
    idx = build_index(build_hasher(ds.dim, seed), ds, m1)
    for w in bucket_size_warnings(idx.bucket_sizes()):
        log.warning(w)
    if cfg.get("buckets_out"):
        write_bucket_dump(idx, cfg["buckets_out"])
    lines = ["p,recall"]
    for p in cfg.get("p", [0, 1, 2]):
        lines.append(f"{p},{knn_recall(idx, queries, k, p):.6f}")
    _emit("\n".join(lines) + "\n", cfg.get("output"))
    return EXIT_OK


def _run(cfg: dict) -> int:
    report = run_pipeline(PipelineConfig.from_dict(cfg))
    summary = {"n": report.n, "clusters": report.n_clusters, "noise": report.n_noise,
               "nmi": report.nmi, "rand": report.rand, "eps2": report.eps2}
    if not cfg.get("report_out"):
        summary = report.to_dict()
    print(json.dumps(summary, indent=None if cfg.get("report_out") else 2))
    return EXIT_OK


def cmd_ascend(args) -> int:
    cfg = _merged(args)
    exact = cfg.pop("exact", False)
    cfg["algorithm"] = "nnga" if exact else "nnga_plus"
    return _run(cfg)


def cmd_label(args) -> int:
    cfg = _merged(args)
    if cfg.pop("prototypes", False):
        cfg.update(input_format="prototypes", normalize=False)
    cfg["algorithm"] = cfg.pop("labeler", "eps")
    return _run(cfg)


def cmd_cluster(args) -> int:
    return _run(_merged(args))


def cmd_eval(args) -> int:
    a = read_labels_csv(args.truth)
    b = read_labels_csv(args.predicted)
    print(json.dumps({"n": int(len(a)), "nmi": nmi(a, b), "rand": rand_index(a, b)}))
    return EXIT_OK


def cmd_segment(args) -> int:
    from .imaging import boundary_map, read_ppm, segment, write_pgm, write_ppm
    import time

    cfg = _merged(args)
    seed = cfg.get("seed", 0)
    ascent = AscentParams(k1=cfg.get("k1", 60), eps1=cfg.get("eps1", 1e-5),
                          j_max=cfg.get("j_max", 15), m1=cfg.get("m1", 200),
                          p=cfg.get("p", 1), k2=cfg.get("k2"), seed=seed)
    labeling = EpsParams(eps2=cfg.get("eps2"), eps_knn=cfg.get("eps_knn", 10),
                         k3=cfg.get("k3", 1), m1=cfg.get("label_m1") or ascent.m1, seed=seed)
    img = read_ppm(cfg["input"])
    t0 = time.perf_counter()
    seg = segment(img, ascent, labeling, workers=cfg.get("workers"))
    ms = (time.perf_counter() - t0) * 1e3
    if cfg.get("out_image"):
        write_ppm(seg.rendered, cfg["out_image"])
    if cfg.get("boundary_out"):
        write_pgm(boundary_map(seg.clustering.labels, img.height, img.width), cfg["boundary_out"])
    if cfg.get("labels_out"):
        write_labels_csv(seg.clustering, cfg["labels_out"])
    report = {"width": img.width, "height": img.height, "n": img.width * img.height,
              "clusters": seg.clustering.n_clusters, "eps2": seg.eps2, "ms": round(ms, 3),
              "params": {"ascent": ascent.to_dict(), "eps_knn": labeling.eps_knn,
                         "k3": labeling.k3, "label_m1": labeling.m1}}
    _emit(json.dumps(report, indent=2) + "\n", cfg.get("report_out"))
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _merged(args)
    out = cfg.pop("output", None)
    if "ns" not in cfg:
        raise ConfigError("bench needs --n")
    if "m1s" not in cfg and "points_per_bucket" not in cfg:
        cfg["points_per_bucket"] = 1000
    workers = cfg.pop("workers", [1])
    try:
        rows = bench(workers=workers, **cfg)
    except TypeError as e:
        raise ConfigError(str(e)) from None
    if out:
        write_timing_csv(rows, out)
        from .plotting import plot_timings
        plot_timings(rows, str(Path(out).with_suffix(".png")))
    else:
        write_timing_csv(rows, "/dev/stdout")
    return EXIT_OK


COMMANDS = {"normalize": cmd_normalize, "knn": cmd_knn, "ascend": cmd_ascend,
            "label": cmd_label, "cluster": cmd_cluster, "eval": cmd_eval,
            "segment": cmd_segment, "bench": cmd_bench}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="nnshift: %(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as e:
        print(f"nnshift: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as e:
        print(f"nnshift: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except InvariantError as e:
        print(f"nnshift: internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as e:  # noqa: BLE001
        print(f"nnshift: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
