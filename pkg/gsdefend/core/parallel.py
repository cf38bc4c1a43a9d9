"""Ordered thread-pool map used for per-view and per-image work."""

from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from gsdefend.core.config import config

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """
    Apply fn to every item, possibly in parallel, returning results in input order.

    Results are reduced by the caller in list order, so outputs do not depend on scheduling.
    """
    items = list(items)
    workers = workers or config.resolved_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
