"""
Order-preserving parallel map over work chunks.

Work is always split into chunks whose boundaries depend only on the problem
size, never on the worker count, and results come back in input order. Any
value of HTC_SIM_THREADS therefore yields identical outputs.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

from htcsim.errors import ConfigurationError
from htcsim.logging_config import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "HTC_SIM_THREADS"


def worker_count(requested: Optional[int] = None) -> int:
    """
    Number of worker threads to use.

    Args:
        requested: Explicit count; falls back to HTC_SIM_THREADS, then 1

    Raises:
        ConfigurationError: If the value is not a positive integer
    """
    raw = requested if requested is not None else os.environ.get(THREADS_ENV, "1")
    try:
        count = int(raw)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if count < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be a positive integer, got {count}")
    return count


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> list[R]:
    """Apply func to every item, in parallel when workers > 1, keeping input order."""
    items = list(items)
    workers = min(worker_count(workers), max(len(items), 1))
    if workers == 1:
        return [func(item) for item in items]
    logger.debug(f"mapping {len(items)} chunks on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def chunk_bounds(total: int, size: int) -> list[tuple[int, int]]:
    """[start, stop) pairs covering range(total) in fixed-size chunks."""
    return [(start, min(start + size, total)) for start in range(0, total, size)]
