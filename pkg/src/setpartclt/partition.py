"""Set partitions of [n], their restricted growth coding, and three statistics.

Blocks are kept in canonical order (sorted by minimum element), so the block
index of element ``i`` is ``rgs[i-1] + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import ResourceLimitError

ENUMERATE_CAP = 14


class Arc(NamedTuple):
    lo: int
    hi: int


@dataclass(frozen=True)
class SetPartition:
    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        seen = []
        for b in self.blocks:
            if not b:
                raise ValueError("empty block")
            if any(x >= y for x, y in zip(b, b[1:])):
                raise ValueError(f"block {b} is not strictly increasing")
            seen.extend(b)
        if sorted(seen) != list(range(1, self.n + 1)):
            raise ValueError(f"blocks do not partition 1..{self.n}")
        mins = [b[0] for b in self.blocks]
        if mins != sorted(mins):
            raise ValueError("blocks must be ordered by minimum element")

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]]) -> "SetPartition":
        """Build from blocks in any order; the result is canonical."""
        bs = sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0])
        return cls(sum(len(b) for b in bs), tuple(bs))

    @classmethod
    def parse(cls, text: str) -> "SetPartition":
        """Parse ``"135|24|6|7"`` or, for n > 9, ``"1,3,5|2,4|6|7"``."""
        blocks = []
        for chunk in text.split("|"):
            chunk = chunk.strip()
            items = chunk.split(",") if "," in chunk else list(chunk)
            blocks.append([int(x) for x in items])
        return cls.from_blocks(blocks)

    def __str__(self) -> str:
        sep = "," if self.n > 9 else ""
        return "|".join(sep.join(map(str, b)) for b in self.blocks)


def is_rgs(a: Sequence[int]) -> bool:
    if len(a) == 0 or a[0] != 0:
        return False
    top = 0
    for x in a[1:]:
        if x < 0 or x > top + 1:
            return False
        top = max(top, x)
    return True


def to_rgs(p: SetPartition) -> tuple[int, ...]:
    a = [0] * p.n
    for idx, block in enumerate(p.blocks):
        for x in block:
            a[x - 1] = idx
    return tuple(a)


def from_rgs(a: Sequence[int]) -> SetPartition:
    a = [int(x) for x in a]
    if not is_rgs(a):
        raise ValueError(f"not a restricted growth sequence: {a}")
    blocks: list[list[int]] = [[] for _ in range(max(a) + 1)]
    for i, x in enumerate(a, start=1):
        blocks[x].append(i)
    return SetPartition(len(a), tuple(tuple(b) for b in blocks))


def canonical_labels(labels: Sequence[int]) -> np.ndarray:
    """Relabel an arbitrary labelling by order of first appearance (an RGS)."""
    labels = np.asarray(labels)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[inverse]


def enumerate_rgs(n: int, cap: int = ENUMERATE_CAP) -> Iterator[tuple[int, ...]]:
    """All restricted growth sequences of length n in lexicographic order."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > cap:
        raise ResourceLimitError(f"n={n} exceeds the enumeration cap {cap}")
    if n == 1:
        yield (0,)
        return
    a = [0] * n
    # b[j] = 1 + max(a[:j]), the largest value a[j] may take
    b = [1] * n
    top = 1
    last = n - 1
    while True:
        yield tuple(a)
        if a[last] < top:
            a[last] += 1
            continue
        j = last - 1
        while a[j] == b[j]:
            j -= 1
        if j == 0:
            return
        a[j] += 1
        top = b[j] + (a[j] == b[j])
        for i in range(j + 1, last):
            a[i] = 0
            b[i] = top
        a[last] = 0


def enumerate_partitions(n: int, cap: int = ENUMERATE_CAP) -> Iterator[SetPartition]:
    for a in enumerate_rgs(n, cap):
        yield from_rgs(a)


def levels(p: SetPartition) -> int:
    a = to_rgs(p)
    return sum(1 for x, y in zip(a, a[1:]) if x == y)


def dimension_index(p: SetPartition) -> int:
    return sum(b[-1] - b[0] + 1 for b in p.blocks)


def arcs(p: SetPartition) -> list[Arc]:
    out = [Arc(x, y) for b in p.blocks for x, y in zip(b, b[1:])]
    out.sort()
    return out


def crossings(p: SetPartition) -> int:
    """Pairs of arcs ``(i, j), (i2, j2)`` with ``i < i2 < j < j2``, by brute force."""
    arr = np.array(arcs(p), dtype=np.int64).reshape(-1, 2)
    lo, hi = arr[:, 0], arr[:, 1]
    cross = (lo[:, None] < lo[None, :]) & (lo[None, :] < hi[:, None]) & (hi[:, None] < hi[None, :])
    return int(cross.sum())


def block_count(p: SetPartition) -> int:
    return len(p.blocks)


def block_size_of(p: SetPartition, i: int) -> int:
    if not 1 <= i <= p.n:
        raise ValueError(f"element {i} outside 1..{p.n}")
    for b in p.blocks:
        if i in b:
            return len(b)
    raise AssertionError("unreachable for a valid partition")


STATISTICS = {
    "levels": levels,
    "dimension": dimension_index,
    "crossings": crossings,
    "blocks": block_count,
}
