"""Seed derivation and an order-preserving thread map.

Every stochastic routine in the package draws the randomness for trial ``t``
from ``trial_rng(seed, t)``, so results never depend on how trials are split
across threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "IUNORM_THREADS"


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for trial ``index`` of a run seeded with ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and trial index must be non-negative")
    return np.random.default_rng([int(seed), int(index)])


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(value, 1)


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> List[R]:
    """``list(map(fn, items))``, optionally on a thread pool; output order is input order."""
    threads = default_threads() if threads is None else int(threads)
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
