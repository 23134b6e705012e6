"""PNG figures for cluster assignments and benchmark timings."""

from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_clusters(points, labels, path, title: str = "") -> None:
    """Scatter of the first two coordinates colored by label; noise in gray."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    labels = np.asarray(labels)
    y = pts[:, 1] if pts.shape[1] > 1 else np.zeros(len(pts))
    fig, ax = plt.subplots(figsize=(6, 6))
    noise = labels < 0
    if noise.any():
        ax.scatter(pts[noise, 0], y[noise], s=4, c="0.7", label="noise")
    ax.scatter(pts[~noise, 0], y[~noise], s=4, c=labels[~noise] % 20, cmap="tab20")
    ax.set_xlabel("x0")
    ax.set_ylabel("x1" if pts.shape[1] > 1 else "")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _swept(rows) -> str:
    # the axis with the most distinct values is the one being swept
    best, count = "n", 0
    for key in ("n", "m1", "p", "workers"):
        c = len({r[key] for r in rows})
        if c > count:
            best, count = key, c
    return best


def plot_timings(rows, path, x: str | None = None) -> None:
    """Median time per phase against the swept parameter (``n``, ``m1``, ``p`` or ``workers``)."""
    rows = list(rows)
    if not rows:
        raise ValueError("no timing rows to plot")
    x = x or _swept(rows)
    groups = defaultdict(list)
    for r in rows:
        groups[(r["phase"], r[x])].append(r["ms"])
    fig, ax = plt.subplots(figsize=(6, 4))
    for phase in sorted({r["phase"] for r in rows}):
        xs = sorted(v for ph, v in groups if ph == phase)
        ys = [np.median(groups[(phase, v)]) / 1e3 for v in xs]
        ax.plot(xs, ys, marker="o", label=phase)
    ax.set_xlabel(x)
    ax.set_ylabel("seconds (median)")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
