"""Deterministic chunked evaluation over a thread pool."""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

ENV_THREADS = "ANNULUS_DIV_THREADS"
CHUNK = 2048


def worker_count(threads=None):
    """Thread cap from the argument, else ``ANNULUS_DIV_THREADS`` (0 = auto)."""
    if threads is None:
        raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if threads < 0:
        raise ValueError("thread count must be >= 0")
    if threads == 0:
        threads = min(8, os.cpu_count() or 1)
    return threads


def map_chunks(func, points, threads=None, chunk=CHUNK):
    """Apply ``func`` to row chunks of ``points`` and concatenate in order.

    Chunk boundaries depend only on ``chunk``, never on the thread count, so
    results are bit-identical for any number of workers.
    """
    points = np.asarray(points)
    starts = range(0, points.shape[0], chunk)
    pieces = [points[s : s + chunk] for s in starts]
    if not pieces:
        return func(points)
    workers = worker_count(threads)
    if workers == 1 or len(pieces) == 1:
        results = [func(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(func, pieces))
    return np.concatenate(results, axis=0)
