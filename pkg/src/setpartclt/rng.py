"""Seeded substreams.

Work is cut into fixed-size chunks by sample index; chunk ``c`` of stream
``tag`` always draws from ``SeedSequence(seed, spawn_key=(tag, c))``. The
chunk layout never depends on how many workers run, so results don't either.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

CHUNK_SIZE = 2000


def stream_tag(name: str) -> int:
    return zlib.crc32(name.encode())


def substream(seed: int, tag: str, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(stream_tag(tag), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def chunk_bounds(total: int, chunk_size: int = CHUNK_SIZE) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk_size, total)) for lo in range(0, total, chunk_size)]


def map_chunks(fn: Callable[..., T], tasks: Sequence[tuple], workers: int = 1) -> list[T]:
    """Run ``fn(*task)`` for every task, returning results in task order."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *t) for t in tasks]
        return [f.result() for f in futures]
