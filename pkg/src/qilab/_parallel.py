import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "QI_LAB_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_THREADS, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pmap(fn, items):
    """Ordered map, threaded when ``QI_LAB_THREADS`` asks for more than one worker."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
