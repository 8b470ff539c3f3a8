"""Exact and leading-order moments of set partition statistics.

Exact moments come from two independent routes. Levels and the box count
have closed forms in Bell-number ratios. Every statistic can also be
computed by a transfer recursion over the number of open blocks while
scanning 1..n; see :func:`transfer_moments`.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import logsumexp

from .bell import BellTable, bell_ratio_exact, build_bell_table, mu_log_weight, solve_alpha

Number = Union[Fraction, float]

STATISTICS = ("levels", "dimension", "crossings", "blocks")
KINDS = ("exact", "asymptotic")


@dataclass(frozen=True)
class MomentReport:
    n: int
    statistic: str
    mean: Number
    variance: Number
    kind: str

    @property
    def sd(self) -> float:
        return math.sqrt(float(self.variance))

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("mean", "variance"):
            v = d[key]
            if isinstance(v, Fraction):
                d[key] = float(v)
                d[key + "_exact"] = f"{v.numerator}/{v.denominator}"
        return d


def _table_for(n_needed: int, table: BellTable | None) -> BellTable:
    if table is None:
        return build_bell_table(n_needed)
    if table.max_n < n_needed:
        raise ValueError(f"Bell table up to {table.max_n} too small, need {n_needed}")
    return table


def levels_moments_exact(n: int, table: BellTable | None = None) -> MomentReport:
    """Mean ``(n-1) B_{n-1}/B_n`` and the conditional-binomial variance.

    Given the box count M, the n - 1 level indicators are independent with
    success probability 1/M, so
    ``VAR = (n-1) E(1/M - 1/M^2) + (n-1)^2 VAR(1/M)``, which expands to
    ``(n-1) B_{n-1}/B_n + (n-1)(n-2) B_{n-2}/B_n - (n-1)^2 (B_{n-1}/B_n)^2``.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    t = _table_for(n, table)
    r1 = Fraction(t[n - 1], t[n])
    r2 = Fraction(t[n - 2], t[n])
    mean = (n - 1) * r1
    var = (n - 1) * r1 + (n - 1) * (n - 2) * r2 - mean * mean
    return MomentReport(n, "levels", mean, var, "exact")


def m_moment_power(n: int, d: int, table: BellTable | None = None) -> Fraction:
    """``E(M**d) = B_{n+d}/B_n`` for M from the Dobinski measure, ``d > -n``."""
    if d <= -n:
        raise ValueError(f"need d > -n, got n={n}, d={d}")
    t = _table_for(n + max(d, 0), table)
    return bell_ratio_exact(t, n, d)


def m_moment_power_numeric(n: int, d: float, width: float = 15.0) -> float:
    """``E(M**d)`` by direct summation of the Dobinski weights over a window."""
    alpha = solve_alpha(n).alpha
    mean, sd = n / alpha, math.sqrt(n) / alpha
    ms = np.arange(max(1, math.floor(mean - width * sd)), math.ceil(mean + width * sd) + 1)
    w = mu_log_weight(n, ms)
    return math.exp(logsumexp(w + d * np.log(ms)) - logsumexp(w))


def m_moments_exact(n: int, table: BellTable | None = None) -> MomentReport:
    t = _table_for(n + 2, table)
    mean = bell_ratio_exact(t, n, 1)
    var = bell_ratio_exact(t, n, 2) - mean * mean
    return MomentReport(n, "boxes", mean, var, "exact")


def _check_asymptotic(n: int) -> float:
    if n < 10:
        raise ValueError(f"asymptotic formulas need n >= 10, got {n}")
    return solve_alpha(n).alpha


def dim_moments_asymptotic(n: int) -> MomentReport:
    """Leading terms: mean ``(a-2)/a^2 n^2``, variance ``(a^2-7a+17)/(a^3(a+1)) n^3``."""
    a = _check_asymptotic(n)
    mean = (a - 2) / a**2 * n**2
    var = (a * a - 7 * a + 17) / (a**3 * (a + 1)) * n**3
    return MomentReport(n, "dimension", mean, var, "asymptotic")


def cr_moments_asymptotic(n: int) -> MomentReport:
    a = _check_asymptotic(n)
    mean = (2 * a - 5) / (4 * a * a) * n**2
    var = (3 * a * a - 22 * a + 56) / (9 * a**3 * (a + 1)) * n**3
    return MomentReport(n, "crossings", mean, var, "asymptotic")


def levels_moments_asymptotic(n: int) -> MomentReport:
    a = _check_asymptotic(n)
    return MomentReport(n, "levels", a, a, "asymptotic")


def blocks_moments_asymptotic(n: int) -> MomentReport:
    a = _check_asymptotic(n)
    return MomentReport(n, "blocks", n / a, n / a**2, "asymptotic")


@lru_cache(maxsize=32)
def _transfer_sums(n: int, statistic: str) -> tuple[int, int, int]:
    """(count, sum T, sum T^2) over all partitions of [n].

    Scan k = 1..n keeping ``a``, the number of blocks started but not yet
    closed, and for levels whether the block of k - 1 is still open. Element
    k either starts a singleton, starts a block that stays open, or joins one
    of the a open blocks (keeping it open or closing it). Ordering open
    blocks by latest element, joining the i-th one adds a - i crossings and
    is a level exactly when i = a and the block of k - 1 is open. Every
    block whose span covers k adds 1 to the dimension index.
    """
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}")
    track_flag = statistic == "levels"
    # state (a, flag) -> [N, S1, S2]
    states: dict = {(0, False): [1, 0, 0]}
    for k in range(1, n + 1):
        room = n - k
        nxt: dict = defaultdict(lambda: [0, 0, 0])

        def push(key, c, t1, t2, N, S1, S2):
            acc = nxt[key]
            acc[0] += c * N
            acc[1] += c * S1 + t1 * N
            acc[2] += c * S2 + 2 * t1 * S1 + t2 * N

        for (a, flag), (N, S1, S2) in states.items():
            if statistic == "dimension":
                x_new, x_join = a + 1, a
            elif statistic == "blocks":
                x_new, x_join = 1, 0
            else:
                x_new, x_join = 0, 0
            # singleton
            if a <= room:
                push((a, False), 1, x_new, x_new * x_new, N, S1, S2)
            # new block left open
            if a + 1 <= room:
                push((a + 1, track_flag), 1, x_new, x_new * x_new, N, S1, S2)
            if a == 0:
                continue
            if statistic == "crossings":
                t1 = a * (a - 1) // 2
                t2 = (a - 1) * a * (2 * a - 1) // 6
            elif statistic == "levels":
                t1 = t2 = 1 if flag else 0
            else:
                t1, t2 = a * x_join, a * x_join * x_join
            if a <= room:
                push((a, track_flag), a, t1, t2, N, S1, S2)
            push((a - 1, False), a, t1, t2, N, S1, S2)
        states = dict(nxt)
    N = S1 = S2 = 0
    for (a, _), (c, s1, s2) in states.items():
        if a == 0:
            N, S1, S2 = N + c, S1 + s1, S2 + s2
    return N, S1, S2


def transfer_moments(n: int, statistic: str) -> MomentReport:
    """Exact mean and variance of a statistic over all partitions of [n]."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    N, S1, S2 = _transfer_sums(n, statistic)
    mean = Fraction(S1, N)
    return MomentReport(n, statistic, mean, Fraction(S2, N) - mean * mean, "exact")


def transfer_count(n: int) -> int:
    """Number of partitions of [n] according to the transfer recursion."""
    return _transfer_sums(n, "blocks")[0]


def exact_moments(n: int, statistic: str, table: BellTable | None = None) -> MomentReport:
    if statistic == "levels" and n >= 2:
        return levels_moments_exact(n, table)
    return transfer_moments(n, statistic)


_ASYMPTOTIC = {
    "levels": levels_moments_asymptotic,
    "dimension": dim_moments_asymptotic,
    "crossings": cr_moments_asymptotic,
    "blocks": blocks_moments_asymptotic,
}


def asymptotic_moments(n: int, statistic: str) -> MomentReport:
    try:
        return _ASYMPTOTIC[statistic](n)
    except KeyError:
        raise ValueError(f"unknown statistic {statistic!r}") from None


def moment_report(n: int, statistic: str, kind: str = "exact") -> MomentReport:
    if kind == "exact":
        return exact_moments(n, statistic)
    if kind == "asymptotic":
        return asymptotic_moments(n, statistic)
    raise ValueError(f"unknown kind {kind!r}")
