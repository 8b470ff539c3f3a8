"""Random set partitions: Stam's two-stage sampler, the min/max conditional
generator, and the labelled balls-into-boxes process behind them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .bell import mu_log_weight, solve_alpha
from .errors import InvalidProfileError
from .partition import SetPartition, canonical_labels, from_rgs
from .rng import CHUNK_SIZE, chunk_bounds, map_chunks, substream

WINDOW_SDS = 15.0
GENERATORS = ("stam", "conditional_pipeline")


@dataclass(frozen=True)
class StamDraw:
    n: int
    m: int
    assignment: tuple[int, ...]  # box in 1..m of each ball 1..n
    partition: SetPartition
    empty_boxes: int


@dataclass(frozen=True)
class MinMaxProfile:
    n: int
    mins: tuple[int, ...]
    maxes: tuple[int, ...]
    a: tuple[int, ...]  # a[k-1] = open blocks when k arrives

    @classmethod
    def from_sets(cls, n, mins, maxes) -> "MinMaxProfile":
        mins, maxes = tuple(sorted(set(mins))), tuple(sorted(set(maxes)))
        if len(mins) != len(maxes) or not mins or mins[0] != 1 or maxes[-1] != n:
            raise InvalidProfileError("need |mins| = |maxes|, 1 in mins, n in maxes")
        is_min = np.zeros(n + 2, dtype=np.int64)
        is_max = np.zeros(n + 2, dtype=np.int64)
        is_min[list(mins)] = 1
        is_max[list(maxes)] = 1
        # a_k = #{mins < k} - #{maxes < k}
        opened = np.cumsum(is_min)
        closed = np.cumsum(is_max)
        return cls(n, mins, maxes, tuple(int(x) for x in opened[:n] - closed[:n]))

    def open_block_excess(self) -> int:
        """``sum_k (a_k - 1)`` over all k."""
        return sum(self.a) - self.n


@dataclass(frozen=True)
class ConditionalDraw:
    partition: SetPartition
    x_trace: tuple[int, ...]  # crossings closed at each k; 0 at block minima


@dataclass(frozen=True)
class BallsTrace:
    n: int
    m: int
    waits: np.ndarray  # W_1..W_m, the ball labels at which box counts 1..m fill
    empty_end: int  # E_n, empty boxes after ball n
    s_total: int  # W_1 + ... + W_m
    d_total: int  # sum over boxes nonempty after n balls of (max - min + 1)


@lru_cache(maxsize=64)
def mu_window(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Support and normalized CDF of the Dobinski measure on a +-15 sd window."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    alpha = solve_alpha(n).alpha
    mean, sd = n / alpha, math.sqrt(n) / alpha
    lo = max(1, math.floor(mean - WINDOW_SDS * sd))
    hi = math.ceil(mean + WINDOW_SDS * sd)
    ms = np.arange(lo, hi + 1, dtype=np.int64)
    w = mu_log_weight(n, ms)
    p = np.exp(w - w.max())
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    ms.flags.writeable = False
    cdf.flags.writeable = False
    return ms, cdf


def sample_m(n: int, rng: np.random.Generator, size=None):
    """Draw box counts from the Dobinski measure by inverse CDF."""
    ms, cdf = mu_window(n)
    u = rng.random(size)
    idx = np.searchsorted(cdf, u, side="right")
    out = ms[np.minimum(idx, len(ms) - 1)]
    return int(out) if size is None else out


def stam_sample(n: int, rng: np.random.Generator) -> StamDraw:
    m = sample_m(n, rng)
    boxes = rng.integers(0, m, size=n)
    part = from_rgs(canonical_labels(boxes))
    return StamDraw(n, m, tuple(int(b) + 1 for b in boxes), part, m - len(part.blocks))


def stam_assignments(n: int, count: int, rng: np.random.Generator):
    """Box counts and a ``count x n`` matrix of 0-based box labels."""
    ms = sample_m(n, rng, size=count)
    return ms, rng.integers(0, ms[:, None], size=(count, n))


def min_max_profile(p: SetPartition) -> MinMaxProfile:
    return MinMaxProfile.from_sets(p.n, [b[0] for b in p.blocks], [b[-1] for b in p.blocks])


def conditional_sample(profile: MinMaxProfile, rng: np.random.Generator) -> ConditionalDraw:
    """Uniform partition with the profile's block minima and maxima.

    Elements are placed in order. Open blocks are kept sorted by their latest
    element; if k joins the i-th of a_k open blocks it crosses exactly the
    a_k - i arcs still open above it.
    """
    n = profile.n
    mins, maxes = set(profile.mins), set(profile.maxes)
    u = rng.random(n)
    label = [0] * n
    open_blocks: list[int] = []
    x_trace = [0] * n
    nblocks = 0
    for k in range(1, n + 1):
        if len(open_blocks) != profile.a[k - 1]:
            raise InvalidProfileError(f"open-block count mismatch at {k}")
        if k in mins:
            blk = nblocks
            nblocks += 1
        else:
            a = len(open_blocks)
            if a == 0:
                raise InvalidProfileError(f"no open block for element {k}")
            i = 1 + int(u[k - 1] * a)
            blk = open_blocks.pop(i - 1)
            x_trace[k - 1] = a - i
        label[k - 1] = blk
        if k not in maxes:
            open_blocks.append(blk)
    if open_blocks:
        raise InvalidProfileError("blocks left open after element n")
    return ConditionalDraw(from_rgs(label), tuple(x_trace))


def conditional_pipeline(n: int, rng: np.random.Generator) -> ConditionalDraw:
    """Stam draw, then a fresh partition with the same minima and maxima."""
    return conditional_sample(min_max_profile(stam_sample(n, rng).partition), rng)


def _stats_chunk(n: int, lo: int, hi: int, seed: int, generator: str) -> np.ndarray:
    rng = substream(seed, generator, lo // CHUNK_SIZE)
    out = np.empty((hi - lo, 4), dtype=np.int64)
    if generator == "stam":
        ms, assign = stam_assignments(n, hi - lo, rng)
        _kernels.partition_stats(assign, int(ms.max()), out)
    elif generator == "conditional_pipeline":
        rows = np.empty((hi - lo, n), dtype=np.int64)
        for r in range(hi - lo):
            draw = conditional_pipeline(n, rng)
            for idx, block in enumerate(draw.partition.blocks):
                for x in block:
                    rows[r, x - 1] = idx
        _kernels.partition_stats(rows, n, out)
    else:
        raise ValueError(f"unknown generator {generator!r}")
    return out


def sample_statistics(n: int, count: int, seed: int, generator: str = "stam",
                      workers: int = 1) -> np.ndarray:
    """``count x 4`` array of (levels, dimension, crossings, blocks) per draw.

    Row order and values depend only on (n, count, seed, generator).
    """
    if n < 1 or count < 1:
        raise ValueError("need n >= 1 and count >= 1")
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}")
    tasks = [(n, lo, hi, seed, generator) for lo, hi in chunk_bounds(count)]
    return np.concatenate(map_chunks(_stats_chunk, tasks, workers))


def sample_rgs(n: int, count: int, seed: int, generator: str = "stam",
               workers: int = 1) -> np.ndarray:
    """``count x n`` array of restricted growth sequences, one per draw."""
    tasks = [(n, lo, hi, seed, generator) for lo, hi in chunk_bounds(count)]
    return np.concatenate(map_chunks(_rgs_chunk, tasks, workers))


def _rgs_chunk(n: int, lo: int, hi: int, seed: int, generator: str) -> np.ndarray:
    rng = substream(seed, generator, lo // CHUNK_SIZE)
    rows = np.empty((hi - lo, n), dtype=np.int64)
    if generator == "stam":
        _, assign = stam_assignments(n, hi - lo, rng)
        for r in range(hi - lo):
            rows[r] = canonical_labels(assign[r])
    else:
        for r in range(hi - lo):
            draw = conditional_pipeline(n, rng)
            for idx, block in enumerate(draw.partition.blocks):
                for x in block:
                    rows[r, x - 1] = idx
    return rows


def balls_process(n: int, m: int, rng: np.random.Generator) -> BallsTrace:
    """Drop balls 1, 2, ... uniformly into m boxes.

    ``E_n`` and ``D_n`` look at the first n balls only; the fill times keep
    dropping past n until every box is occupied.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    assign = rng.integers(0, m, size=n)
    first = np.empty(m, dtype=np.int64)
    last = np.empty(m, dtype=np.int64)
    _kernels.box_spans(assign, m, first, last)
    filled = first >= 0
    d_total = int((last[filled] - first[filled] + 1).sum())
    empty_end = int(m - filled.sum())
    fill_time = np.where(filled, first + 1, 0)
    offset = n
    batch = max(m, 1024)
    while not filled.all():
        extra = rng.integers(0, m, size=batch)
        boxes, idx = np.unique(extra, return_index=True)
        fresh = ~filled[boxes]
        fill_time[boxes[fresh]] = offset + idx[fresh] + 1
        filled[boxes[fresh]] = True
        offset += batch
    waits = np.sort(fill_time)
    return BallsTrace(n, m, waits, empty_end, int(waits.sum()), d_total)


def _balls_chunk(n: int, m: int, lo: int, hi: int, seed: int, chunk: int) -> np.ndarray:
    rng = substream(seed, "balls", lo // chunk)
    out = np.empty((hi - lo, 3), dtype=np.int64)
    for r in range(hi - lo):
        t = balls_process(n, m, rng)
        out[r] = (t.d_total, t.empty_end, t.s_total)
    return out


def balls_trials(n: int, m: int, trials: int, seed: int, workers: int = 1,
                 chunk: int = 50) -> np.ndarray:
    """``trials x 3`` array of (D_n, E_n, S_n)."""
    tasks = [(n, m, lo, hi, seed, chunk) for lo, hi in chunk_bounds(trials, chunk)]
    return np.concatenate(map_chunks(_balls_chunk, tasks, workers))
