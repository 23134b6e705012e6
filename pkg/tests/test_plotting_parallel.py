import threading

import numpy as np
import pytest

from nnshift.parallel import CHUNK, chunks, map_ordered, run_chunked
from nnshift.plotting import plot_clusters, plot_timings


def test_chunks_cover_range():
    parts = chunks(5000)
    assert parts[0] == (0, CHUNK) and parts[-1][1] == 5000
    assert sum(e - s for s, e in parts) == 5000
    assert chunks(0) == []


@pytest.mark.parametrize("workers", [1, 3, 8])
def test_run_chunked_fills_every_slot(workers):
    out = np.zeros(10_000, dtype=int)

    def fn(s, e):
        out[s:e] = np.arange(s, e)

    run_chunked(fn, 10_000, workers)
    assert np.array_equal(out, np.arange(10_000))


def test_run_chunked_propagates_errors():
    def fn(s, e):
        raise ValueError("bad chunk")

    with pytest.raises(ValueError):
        run_chunked(fn, 10_000, 4)


def test_map_ordered_keeps_order():
    seen = set()

    def fn(x):
        seen.add(threading.get_ident())
        return x * x

    assert map_ordered(fn, range(50), 4) == [x * x for x in range(50)]


def test_plots(tmp_path):
    rng = np.random.default_rng(0)
    plot_clusters(rng.random((50, 3)), np.r_[np.zeros(25, int), -np.ones(25, int)],
                  tmp_path / "c.png", title="t")
    plot_clusters(rng.random((10, 1)), np.zeros(10, int), tmp_path / "c1.png")
    rows = [dict(n=n, m1=n // 1000, p=1, workers=1, phase=ph, ms=float(n) / 100)
            for n in (1000, 2000, 4000) for ph in ("ascent", "label")]
    plot_timings(rows, tmp_path / "t.png")
    for f in ("c.png", "c1.png", "t.png"):
        assert (tmp_path / f).read_bytes()[:4] == b"\x89PNG"
    with pytest.raises(ValueError):
        plot_timings([], tmp_path / "x.png")
