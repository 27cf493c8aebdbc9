"""Primes ``p = a m^2 + 1`` with a small squarefree part of ``p - 1``."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .arithmetic import SieveTables
from .errors import InvalidArgument
from .progressions import ZETA2

#: relative guard band on ``p**theta`` so exact powers do not flap
GUARD = 1e-12


@dataclass
class Am2Census:
    x: int
    theta: float
    rows: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.rows)

    def summary(self) -> dict:
        return {"x": self.x, "theta": self.theta, "count": self.count,
                "normalized": self.count / self.x ** (7 / 9)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["p", "s", "m"])
        w.writerows(self.rows)
        return buf.getvalue()


def census(tables: SieveTables, x: int, theta: float) -> Am2Census:
    """Primes ``p <= x`` with ``s(p - 1) <= p^theta``, as rows ``(p, s, m)``.

    ``p = 2`` is included since ``s(1) = 1``.
    """
    if not 0 < theta <= 1:
        raise InvalidArgument(f"theta must be in (0, 1], got {theta}")
    tables.require(x)
    p = tables.primes[tables.primes <= x]
    s = tables.kernel[p - 1]
    keep = s <= p.astype(np.float64) ** theta * (1 + GUARD)
    p, s = p[keep], s[keep]
    rows = [(pi, si, math.isqrt((pi - 1) // si)) for pi, si in zip(p.tolist(), s.tolist())]
    return Am2Census(x, theta, rows)


@dataclass
class WeightedSumReport:
    x: int
    y: int
    lhs: float
    main: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.main

    def to_record(self) -> dict:
        return {"x": self.x, "y": self.y, "lhs": self.lhs, "main": self.main, "ratio": self.ratio}


def _check_weighted(tables, x, y):
    if y < 1:
        raise InvalidArgument(f"y must be >= 1, got {y}")
    if x < 1:
        raise InvalidArgument(f"x must be >= 1, got {x}")
    tables.require(2 * x + 1)


def weighted_terms_q_major(tables: SieveTables, x: int, y: int) -> np.ndarray:
    """All ``Lambda(k)`` with ``y < q <= 2y``, ``x + 1 < k <= 2x + 1``, ``k = 1 mod q^2``."""
    _check_weighted(tables, x, y)
    parts = []
    for q in range(y + 1, 2 * y + 1):
        m = q * q
        # smallest k > x + 1 with k = 1 mod m
        start = x + 2 + (1 - (x + 2)) % m
        parts.append(tables.lam[start : 2 * x + 2 : m])
    return np.concatenate(parts) if parts else np.zeros(0)


def weighted_terms_n_major(tables: SieveTables, x: int, y: int) -> np.ndarray:
    """The same multiset of terms, generated by looping over ``n`` in ``(x, 2x]``."""
    _check_weighted(tables, x, y)
    n = np.arange(x + 1, 2 * x + 1, dtype=np.int64)
    lam = tables.lam[n + 1]
    count = np.zeros(n.size, dtype=np.int64)
    for q in range(y + 1, 2 * y + 1):
        count += n % (q * q) == 0
    return np.repeat(lam, count)


def weighted_sum(tables: SieveTables, x: int, y: int) -> WeightedSumReport:
    """``sum_{x < n <= 2x} Lambda(n + 1) #{y < q <= 2y : q^2 | n}`` against ``x / (2 zeta(2) y)``."""
    lhs = math.fsum(weighted_terms_q_major(tables, x, y).tolist())
    return WeightedSumReport(x, y, lhs, x / (2 * ZETA2 * y))


def _squarefree_upto(n: int) -> np.ndarray:
    mask = np.ones(n + 1, dtype=bool)
    mask[0] = False
    d = 2
    while d * d <= n:
        mask[d * d :: d * d] = False
        d += 1
    return mask


def sparsity_count(x: int, theta: float) -> int:
    """``#{n <= x : s(n) <= n^theta}`` via the pairs ``(a, m)``, ``a`` squarefree, ``a m^2 <= x``.

    Each ``n`` has exactly one such pair (``a = s(n)``), so the pairs are
    counted without double counting; the ``n^theta`` test uses the same guard
    band as :func:`census`.
    """
    if x < 1:
        raise InvalidArgument(f"x must be >= 1, got {x}")
    a_max = min(x, math.floor(x**theta * (1 + GUARD)))
    sqf = np.flatnonzero(_squarefree_upto(a_max))
    total = 0
    for a in sqf.tolist():
        m = np.arange(1, math.isqrt(x // a) + 1, dtype=np.int64)
        n = a * m * m
        ok = a <= n.astype(np.float64) ** theta * (1 + GUARD)
        total += int(np.count_nonzero(ok))
    return total


def sparsity_scan(tables: SieveTables, x: int, theta: float) -> int:
    """Exhaustive count of ``n <= x`` with ``s(n) <= n^theta`` from the kernel table."""
    tables.require(x)
    n = np.arange(1, x + 1, dtype=np.int64)
    return int(np.count_nonzero(tables.kernel[1:x + 1] <= n.astype(np.float64) ** theta * (1 + GUARD)))
