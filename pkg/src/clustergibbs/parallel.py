"""Order-preserving worker pool used by the enumeration kernels.

Work is always split into chunks whose boundaries do not depend on the worker
count, and results come back in submission order, so reductions are
bit-identical for any number of threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_default_threads = 1


def set_default_threads(n: int) -> None:
    global _default_threads
    _default_threads = max(1, int(n))


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    items = list(items)
    n = _default_threads if threads is None else max(1, int(threads))
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def chunked(seq: Sequence[T], size: int) -> list[Sequence[T]]:
    return [seq[i:i + size] for i in range(0, len(seq), size)]
