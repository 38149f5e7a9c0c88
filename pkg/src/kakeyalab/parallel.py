"""Deterministic work distribution.

KAKEYA_LAB_THREADS sets how many worker threads evaluate independent
chunks.  Chunk boundaries and the reduction order are fixed by the
caller, never by the thread count, so results are bit-identical for
any setting.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

__all__ = ["thread_count", "map_ordered"]


def thread_count() -> int:
    raw = os.environ.get("KAKEYA_LAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"KAKEYA_LAB_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def map_ordered(fn: Callable[[T], R], jobs: Sequence[T]) -> list[R]:
    """Apply fn to each job, results in job order regardless of threads."""
    n = thread_count()
    if n == 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, jobs))
