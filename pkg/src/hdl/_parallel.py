"""Order-preserving fan-out over a thread pool capped by ``HDL_THREADS``."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    try:
        cap = int(os.environ.get("HDL_THREADS", "1"))
    except ValueError:
        cap = 1
    return max(1, cap)


def parallel_map(fn, items):
    """``[fn(x) for x in items]``, evaluated on up to ``HDL_THREADS`` workers."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
