"""Compiled inner loops over batches of box assignments.

A row ``assign[r]`` gives the box (any nonnegative label) of balls 1..n.
"""

import numba as nb
import numpy as np

LEVELS, DIMENSION, CROSSINGS, BLOCKS = 0, 1, 2, 3


@nb.njit(cache=True)
def partition_stats(assign, n_labels, out):
    """Fill ``out[r] = (levels, dimension, crossings, blocks)`` for each row.

    Crossings are counted by a sweep: when element k arrives with predecessor
    p in its block, every open arc whose left end lies strictly between p and
    k crosses the arc (p, k). Open-arc left ends live in a Fenwick tree.
    """
    rows, n = assign.shape
    first = np.empty(n_labels, np.int64)
    last = np.empty(n_labels, np.int64)
    prev = np.empty(n_labels, np.int64)
    tree = np.zeros(n + 1, np.int64)
    for r in range(rows):
        for b in range(n_labels):
            first[b] = -1
            prev[b] = -1
        lev = 0
        for i in range(n):
            b = assign[r, i]
            if first[b] < 0:
                first[b] = i
            last[b] = i
            if i > 0 and assign[r, i - 1] == b:
                lev += 1
        dim = 0
        nblocks = 0
        for b in range(n_labels):
            if first[b] >= 0:
                dim += last[b] - first[b] + 1
                nblocks += 1
        for j in range(n + 1):
            tree[j] = 0
        marked = 0
        cr = 0
        for k in range(n):
            b = assign[r, k]
            p = prev[b]
            if p >= 0:
                s = 0
                j = p + 1
                while j > 0:
                    s += tree[j]
                    j -= j & (-j)
                cr += marked - s
                j = p + 1
                while j <= n:
                    tree[j] -= 1
                    j += j & (-j)
                marked -= 1
            if k != last[b]:
                j = k + 1
                while j <= n:
                    tree[j] += 1
                    j += j & (-j)
                marked += 1
            prev[b] = k
        out[r, LEVELS] = lev
        out[r, DIMENSION] = dim
        out[r, CROSSINGS] = cr
        out[r, BLOCKS] = nblocks


@nb.njit(cache=True)
def box_spans(assign, m, first, last):
    """First and last (0-based) ball index per box, -1 for empty boxes."""
    for b in range(m):
        first[b] = -1
        last[b] = -1
    for i in range(assign.shape[0]):
        b = assign[i]
        if first[b] < 0:
            first[b] = i
        last[b] = i
