"""Bell numbers, the root of u*exp(u) = n + 1, and Dobinski weights."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ResourceLimitError

MAX_N_CAP = 5000


@dataclass(frozen=True)
class BellTable:
    """Exact Bell numbers ``B_0 .. B_max_n``."""

    max_n: int
    values: tuple[int, ...]

    def __getitem__(self, n: int) -> int:
        if not 0 <= n <= self.max_n:
            raise IndexError(f"Bell index {n} outside table 0..{self.max_n}")
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)

    def log(self, n: int) -> float:
        return math.log(self[n])


@dataclass(frozen=True)
class AlphaValue:
    n: int
    alpha: float
    residual: float


class _TriangleCache:
    """Grows the Bell triangle on demand; readers get immutable snapshots."""

    def __init__(self):
        self._lock = threading.Lock()
        self._bells = [1]
        self._row = [1]

    def get(self, max_n: int) -> tuple[int, ...]:
        with self._lock:
            bells, row = self._bells, self._row
            while len(bells) <= max_n:
                nxt = [row[-1]]
                for x in row:
                    nxt.append(nxt[-1] + x)
                row = nxt
                bells.append(row[0])
            self._row = row
            return tuple(bells[: max_n + 1])


_cache = _TriangleCache()


def build_bell_table(max_n: int, cap: int = MAX_N_CAP) -> BellTable:
    """Bell numbers up to ``max_n`` by the Bell triangle, memoized across calls."""
    if max_n < 0:
        raise ValueError(f"max_n must be >= 0, got {max_n}")
    if max_n > cap:
        raise ResourceLimitError(f"max_n={max_n} exceeds the Bell table cap {cap}")
    return BellTable(max_n, _cache.get(max_n))


def bell_ratio_exact(table: BellTable, n: int, k: int) -> Fraction:
    """``B_{n+k} / B_n`` as an exact rational."""
    if n < 0 or not 0 <= n + k <= table.max_n or n > table.max_n:
        raise IndexError(f"B_{n + k}/B_{n} outside table 0..{table.max_n}")
    return Fraction(table[n + k], table[n])


def solve_alpha(n: int, rtol: float = 1e-13, max_iter: int = 100) -> AlphaValue:
    """Positive root of ``u * exp(u) = n + 1``.

    Newton's method on ``u + log(u) - log(n + 1)``, which is concave and
    increasing in u, so iterates started below the root stay below it.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    target = math.log(n + 1)
    if n == 0:
        # log(1) = 0 makes the log-form guess degenerate
        u = 0.5
    else:
        u = max(target - math.log(math.log(n + 2) + 1), 1e-3)
    for _ in range(max_iter):
        f = u + math.log(u) - target
        step = f / (1.0 + 1.0 / u)
        u_next = u - step
        if u_next <= 0:
            u_next = u / 2
        u = u_next
        if abs(step) <= rtol * u:
            break
    residual = u * math.exp(u) - (n + 1)
    return AlphaValue(n, u, residual)


def bell_ratio_asymptotic(n: int, k: int) -> float:
    """``(n+k)! / (n! * alpha_n**k)``, the fixed-k approximation to ``B_{n+k}/B_n``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if abs(k) > n / 2:
        raise ValueError(f"|k|={abs(k)} too large relative to n={n}")
    alpha = solve_alpha(n).alpha
    return math.exp(gammaln(n + k + 1) - gammaln(n + 1) - k * math.log(alpha))


def mu_log_weight(n: int, m, table: BellTable | None = None):
    """Log of the Dobinski measure ``m**n / (e * B_n * m!)``.

    Without a table the normalizing ``-1 - log B_n`` is dropped. ``m`` may be
    an integer or an integer array.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    m_arr = np.asarray(m)
    if np.any(m_arr < 1):
        raise ValueError("m must be >= 1")
    w = n * np.log(m_arr) - gammaln(m_arr + 1)
    if table is not None:
        w = w - 1.0 - table.log(n)
    return float(w) if w.ndim == 0 else w


def dobinski_partial(n: int, terms: int) -> float:
    """``(1/e) * sum_{m=0}^{terms} m**n / m!`` evaluated in log space.

    The ``m = 0`` term is ``0**0 = 1`` when ``n = 0`` and vanishes otherwise.
    """
    if n < 0 or terms < 1:
        raise ValueError("need n >= 0 and terms >= 1")
    m = np.arange(1, terms + 1)
    logs = n * np.log(m) - gammaln(m + 1)
    if n == 0:
        logs = np.append(logs, 0.0)
    return math.exp(logsumexp(logs) - 1.0)
