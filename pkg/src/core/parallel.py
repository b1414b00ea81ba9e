import os
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

logger = logging.getLogger('engine')

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "FDNET_WORKERS"
SINGLE_THREAD_ENV = "FDNET_SINGLE_THREAD"


def resolve_workers(workers: Optional[int] = None) -> int:
    """
    Number of worker processes to use.

    FDNET_SINGLE_THREAD=1 forces 1; otherwise an explicit value wins, then
    FDNET_WORKERS, then os.cpu_count().
    """
    if os.environ.get(SINGLE_THREAD_ENV, "").strip() not in ("", "0"):
        return 1
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f"{WORKERS_ENV}={env!r} is not an integer, ignoring it")
    return os.cpu_count() or 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> list[R]:
    """
    Apply fn to every item, in parallel when more than one worker is available.

    Results come back in input order whatever the completion order; fn must be a
    module-level function so it can be pickled.
    """
    tasks = list(items)
    n_workers = min(resolve_workers(workers), len(tasks))
    if n_workers <= 1:
        return [fn(t) for t in tasks]
    logger.debug(f"ordered_map: {len(tasks)} tasks on {n_workers} workers")
    with ProcessPoolExecutor(max_workers=n_workers) as executor:
        futures = [executor.submit(fn, t) for t in tasks]
        return [f.result() for f in futures]
