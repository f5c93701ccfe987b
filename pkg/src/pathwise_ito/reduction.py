"""Deterministic chunked evaluation helpers.

Per-level sums are assembled from per-cell terms.  Term evaluation may be
spread over a thread pool, but chunk boundaries depend only on a fixed chunk
size and partial results are written back by index, so the assembled term
array (and every reduction of it) is bit-identical for any thread count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

DEFAULT_CHUNK = 2048


def chunk_bounds(n: int, chunk: int = DEFAULT_CHUNK) -> list[tuple[int, int]]:
    """Split range(n) into contiguous [lo, hi) chunks of a fixed size."""
    if n <= 0:
        return []
    chunk = max(1, int(chunk))
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]


def map_chunked(
    fill: Callable[[int, int, np.ndarray], None],
    out: np.ndarray,
    threads: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> np.ndarray:
    """Fill ``out`` along its first axis by calling ``fill(lo, hi, out)``.

    ``fill`` must write only rows [lo, hi) of ``out``.  With threads > 1 the
    chunks run on a thread pool; the output does not depend on scheduling.
    """
    bounds = chunk_bounds(out.shape[0], chunk)
    if threads <= 1 or len(bounds) <= 1:
        for lo, hi in bounds:
            fill(lo, hi, out)
        return out
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        futures = [pool.submit(fill, lo, hi, out) for lo, hi in bounds]
        for fut in futures:
            fut.result()
    return out


def running_sum(terms: np.ndarray) -> np.ndarray:
    """Left-to-right cumulative sum with a leading zero.

    Sequential order is part of the contract: repeated runs give the same
    bits, and a partial sum always equals the reported value at that point.
    """
    terms = np.asarray(terms, dtype=np.float64)
    out = np.empty(len(terms) + 1, dtype=np.float64)
    out[0] = 0.0
    np.cumsum(terms, out=out[1:])
    return out
