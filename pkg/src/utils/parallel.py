"""
Thread pool helpers
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count; None means all available cores"""
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return threads


def map_ordered(
    func: Callable[[T], R], items: Sequence[T], threads: Optional[int] = None
) -> List[R]:
    """Map over items in a pool; results keep the input order"""
    workers = min(resolve_threads(threads), max(len(items), 1))
    if workers == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def chunked(n_items: int, n_chunks: int) -> List[range]:
    """Split range(n_items) into contiguous chunks"""
    n_chunks = max(1, min(n_chunks, n_items))
    bounds = [round(i * n_items / n_chunks) for i in range(n_chunks + 1)]
    return [
        range(bounds[i], bounds[i + 1])
        for i in range(n_chunks)
        if bounds[i + 1] > bounds[i]
    ]
