"""Deterministic seeding and optional thread parallelism.

All randomized entry points take a 64-bit unsigned seed.  Internal phases and
parallel tasks derive independent child streams by the fixed splitting rule

    child(seed, *path) = numpy.random.SeedSequence(entropy=seed, spawn_key=path)

so results never depend on scheduling or thread count.  The environment
variable ``GLEASON_CSM_THREADS`` caps the worker pool used by batch helpers
(default 1, i.e. serial); outputs are collected in task order either way.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

THREADS_ENV = "GLEASON_CSM_THREADS"

T = TypeVar("T")
R = TypeVar("R")

SeedLike = "int | np.random.Generator"


def as_rng(seed: int | np.random.Generator) -> np.random.Generator:
    """Return a Generator for an integer seed, or pass one through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def child_sequence(seed: int, *path: int) -> np.random.SeedSequence:
    """The documented (seed, task-index) -> child-seed splitting rule."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))


def child_rng(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(child_sequence(seed, *path))


def worker_count() -> int:
    """Worker cap from GLEASON_CSM_THREADS; at least 1."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Map ``fn`` over ``items``, threaded when GLEASON_CSM_THREADS > 1.

    Results come back in input order, so callers see identical output
    regardless of the worker count.  ``fn`` must be pure given its argument
    (per-task seeds travel inside the items).
    """
    workers = min(worker_count(), len(items)) if items else 1
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
