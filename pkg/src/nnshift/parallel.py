"""Fixed-size work chunks fanned out over a thread pool.

Chunk boundaries depend only on the problem size, never on the worker
count, so any function that writes to per-item output slots produces the
same result for 1 worker or 64.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

CHUNK = 2048


def default_workers() -> int:
    return os.cpu_count() or 1


def chunks(n: int, size: int = CHUNK):
    return [(s, min(s + size, n)) for s in range(0, n, size)]


def run_chunked(fn, n: int, workers: int | None = None, size: int = CHUNK) -> None:
    """Call ``fn(start, stop)`` for every chunk of ``range(n)``."""
    parts = chunks(n, size)
    workers = workers or default_workers()
    if workers <= 1 or len(parts) <= 1:
        for s, e in parts:
            fn(s, e)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # list() surfaces exceptions raised inside workers
        list(pool.map(lambda se: fn(*se), parts))


def map_ordered(fn, items, workers: int | None = None) -> list:
    items = list(items)
    workers = workers or default_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
