"""Seed streams and a worker pool whose results do not depend on the worker count."""

from __future__ import annotations

import multiprocessing as mp
import zlib
from concurrent.futures import ProcessPoolExecutor

import numpy as np


def _word(x) -> int:
    if isinstance(x, (int, np.integer)):
        if x < 0:
            raise ValueError("stream keys must be non-negative")
        return int(x)
    return zlib.crc32(str(x).encode())


def seed_sequence(seed: int, *keys) -> np.random.SeedSequence:
    """Seed sequence for the stream named by ``keys`` under a master ``seed``."""
    return np.random.SeedSequence([_word(seed), *(_word(k) for k in keys)])


def rng_for(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(seed, *keys))


def run_tasks(fn, tasks, workers: int = 1) -> list:
    """``[fn(t) for t in tasks]``, optionally over ``workers`` forked processes.

    Every task carries its own seed, so the output is the same for any
    worker count.
    """
    tasks = list(tasks)
    if workers < 1:
        raise ValueError("workers must be positive")
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    ctx = mp.get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(fn, tasks))
