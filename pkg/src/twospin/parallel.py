"""Order-preserving worker pool for independent scan points."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

JOBS_ENV = "TWOSPIN_JOBS"


def default_jobs():
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def ordered_map(fn, items, jobs=None):
    """[fn(x) for x in items], optionally in worker processes; order is kept."""
    items = list(items)
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))
