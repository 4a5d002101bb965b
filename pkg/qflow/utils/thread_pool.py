"""
Bounded thread pool for internal fan-out (sample batches, diagnostic suites).

The pool size is capped by QFLOW_THREADS. Results always come back in input
order, so outputs do not depend on the number of workers.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar
import logging

from qflow.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def max_workers(requested: Optional[int] = None) -> int:
    cap = max(1, int(settings.THREADS))
    if requested is None:
        return cap
    if requested > cap:
        logger.warning(f"Requested {requested} workers, capped at QFLOW_THREADS={cap}")
    return max(1, min(int(requested), cap))


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    items = list(items)
    n_workers = min(max_workers(workers), max(1, len(items)))
    if n_workers == 1:
        return [fn(item) for item in items]
    logger.debug(f"Fanning out {len(items)} tasks over {n_workers} threads")
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items))
