"""Small shared helpers: thread capping and batch shape handling."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = ["thread_count", "parallel_map", "as_batch"]

THREADS_ENV = "EVFAM_THREADS"


def thread_count() -> int:
    """Worker cap from the EVFAM_THREADS environment variable (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Map preserving order; uses a thread pool only when EVFAM_THREADS > 1.

    Evaluation functions in this package are read-only on shared state, so
    threads are safe; results are identical to the serial path.
    """
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def as_batch(u, element_ndim: int) -> tuple[np.ndarray, bool]:
    """Promote a single element to a batch of one.

    Elements of a sample space have a fixed ndim (0 for scalar observations,
    1 for vector observations); batches add one leading axis.  Returns the
    batch array and whether the input was a single element.
    """
    arr = np.asarray(u, dtype=float)
    if arr.ndim == element_ndim:
        return arr[None, ...], True
    if arr.ndim == element_ndim + 1:
        return arr, False
    raise ValueError(f"expected ndim {element_ndim} or {element_ndim + 1}, got {arr.ndim}")
