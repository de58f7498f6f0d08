import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "IFACEDIV_THREADS"


def worker_count(requested=None) -> int:
    """Number of worker threads: ``requested``, else the env cap, else CPU count."""
    if requested is None:
        env = os.environ.get(ENV_THREADS)
        requested = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(requested))


def ordered_map(fn, items, threads=None):
    """``map`` that may fan out to threads but always returns results in input order."""
    items = list(items)
    n = worker_count(threads)
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
