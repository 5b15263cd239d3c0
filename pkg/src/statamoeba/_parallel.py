"""Chunked evaluation with an optional thread pool.

Chunk boundaries depend only on the problem size, never on the worker
count, so results are bit-identical whatever STATAMOEBA_THREADS says.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

ENV_THREADS = "STATAMOEBA_THREADS"


def worker_count(requested: int | None = None) -> int:
    if requested is None:
        try:
            requested = int(os.environ.get(ENV_THREADS, "0"))
        except ValueError:
            requested = 0
    if requested <= 0:
        return os.cpu_count() or 1
    return requested


def run_chunks(fn: Callable[[int, int], None], total: int, chunk: int, workers: int | None = None) -> None:
    """Call ``fn(start, stop)`` over [0, total) in fixed-size chunks."""
    bounds = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    nw = min(worker_count(workers), len(bounds))
    if nw <= 1:
        for s, e in bounds:
            fn(s, e)
        return
    with ThreadPoolExecutor(max_workers=nw) as pool:
        for fut in [pool.submit(fn, s, e) for s, e in bounds]:
            fut.result()
