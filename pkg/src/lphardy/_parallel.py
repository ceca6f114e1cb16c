"""Thread pool with a global worker cap and ordered results."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_max_workers = max(1, min(8, os.cpu_count() or 1))


def set_max_workers(n: int) -> None:
    global _max_workers
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _max_workers = int(n)


def get_max_workers() -> int:
    return _max_workers


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """``[fn(x) for x in items]``, possibly concurrent, always in input order."""
    items = list(items)
    if _max_workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(_max_workers, len(items))) as pool:
        return list(pool.map(fn, items))
