"""Seed derivation and an order-preserving worker pool.

Every random stream in the package is a numpy ``Generator`` seeded from a
master seed mixed with integer indices through the splitmix64 finaliser, so
draw ``(seed, i, j)`` is the same regardless of which worker computes it.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

__all__ = ["derive_seed", "spawn_rng", "thread_count", "pmap"]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

T = TypeVar("T")
R = TypeVar("R")


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, *indices: int) -> int:
    """64-bit seed for the stream addressed by ``indices`` under ``master_seed``."""
    h = _splitmix64(master_seed & _MASK64)
    for i in indices:
        h = _splitmix64(h ^ (i & _MASK64))
    return h


def spawn_rng(master_seed: int, *indices: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, *indices)))


def thread_count() -> int:
    """Worker count: ``MEDIANQMC_THREADS`` if set, else the CPU count."""
    env = os.environ.get("MEDIANQMC_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("MEDIANQMC_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """``list(map(fn, items))`` on a thread pool; results stay in input order."""
    items = list(items)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as ex:
        return list(ex.map(fn, items))
