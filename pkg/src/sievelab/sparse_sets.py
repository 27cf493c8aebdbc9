"""Sparse moduli sets S, derived sets S_t, and empirical hypothesis checks.

Throughout, ``S(R)`` means the members ``q`` with ``R < q <= 2R``.
Enumerators return ascending ``int64`` arrays of the members in a half-open
window ``(a, b]``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .arithmetic import squarefree_kernel
from .errors import DegenerateInput, InvalidArgument


def _squarefree_mask(lo: int, hi: int) -> np.ndarray:
    """Boolean mask over ``lo <= n <= hi`` (``lo >= 1``) marking squarefree ``n``."""
    mask = np.ones(hi - lo + 1, dtype=bool)
    d = 2
    while d * d <= hi:
        sq = d * d
        start = -(-lo // sq) * sq
        mask[start - lo :: sq] = False
        d += 1
    return mask


class ModuliSet:
    """A set of natural numbers with membership test and window enumerator."""

    kind = "abstract"

    def __init__(self, name: str):
        self.id = name

    def __contains__(self, n) -> bool:
        return self.contains(int(n))

    def contains(self, n: int) -> bool:
        raise NotImplementedError

    def members(self, a: int, b: int) -> np.ndarray:
        """Members ``q`` with ``a < q <= b``, ascending."""
        raise NotImplementedError

    def derived_members(self, t: int, a: int, b: int) -> np.ndarray:
        """Members of ``S_t = {q : q t in S}`` in ``(a, b]``.

        Subclasses override this with a closed form; the generic route
        enumerates ``S`` over ``(a t, b t]``.
        """
        m = self.members(a * t, b * t)
        return m[m % t == 0] // t

    def derive(self, t: int) -> "DerivedSet":
        return DerivedSet(self, t)

    def __repr__(self):
        return f"{type(self).__name__}({self.id!r})"


class Squares(ModuliSet):
    kind = "squares"

    def __init__(self):
        super().__init__("squares")

    def contains(self, n):
        return n >= 1 and math.isqrt(n) ** 2 == n

    def members(self, a, b):
        a, b = max(int(a), 0), int(b)
        if b <= a:
            return np.zeros(0, dtype=np.int64)
        r = np.arange(math.isqrt(a) + 1, math.isqrt(b) + 1, dtype=np.int64)
        return r * r

    def derived_members(self, t, a, b):
        # q t is a square iff q = s(t) m^2
        s = squarefree_kernel(t)
        a, b = max(int(a), 0), int(b)
        if b <= a:
            return np.zeros(0, dtype=np.int64)
        m = np.arange(math.isqrt(a // s) + 1, math.isqrt(b // s) + 1, dtype=np.int64)
        q = s * m * m
        return q[(q > a) & (q <= b)]


class AllNaturals(ModuliSet):
    kind = "all"

    def __init__(self):
        super().__init__("all")

    def contains(self, n):
        return n >= 1

    def members(self, a, b):
        return np.arange(max(int(a), 0) + 1, int(b) + 1, dtype=np.int64)

    def derived_members(self, t, a, b):
        return self.members(a, b)


class Squarefree(ModuliSet):
    kind = "squarefree"

    def __init__(self):
        super().__init__("squarefree")

    def contains(self, n):
        return n >= 1 and squarefree_kernel(n) == n

    def members(self, a, b):
        lo, hi = max(int(a), 0) + 1, int(b)
        if hi < lo:
            return np.zeros(0, dtype=np.int64)
        return np.flatnonzero(_squarefree_mask(lo, hi)).astype(np.int64) + lo

    def derived_members(self, t, a, b):
        # q t squarefree iff t squarefree, q squarefree and gcd(q, t) = 1
        if squarefree_kernel(t) != t:
            return np.zeros(0, dtype=np.int64)
        q = self.members(a, b)
        return q[np.gcd(q, t) == 1]


class ExplicitList(ModuliSet):
    kind = "explicit-list"

    def __init__(self, values, name: str = "explicit"):
        super().__init__(name)
        vals = sorted(set(int(v) for v in values))
        if vals and vals[0] < 1:
            raise InvalidArgument("explicit-list members must be >= 1")
        self._vals = vals
        self._arr = np.array(vals, dtype=np.int64)

    @classmethod
    def from_file(cls, path) -> "ExplicitList":
        """One natural per line, ascending; blank lines are skipped."""
        path = Path(path)
        vals = []
        prev = 0
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                text = line.strip()
                if not text:
                    continue
                if not text.isdigit() or int(text) < 1:
                    raise InvalidArgument(f"{path}:{lineno}: not a natural number: {text!r}")
                v = int(text)
                if v <= prev:
                    raise InvalidArgument(f"{path}:{lineno}: values must be strictly ascending")
                vals.append(v)
                prev = v
        return cls(vals, name=f"file:{path}")

    def contains(self, n):
        i = bisect.bisect_left(self._vals, n)
        return i < len(self._vals) and self._vals[i] == n

    def members(self, a, b):
        lo = bisect.bisect_right(self._vals, a)
        hi = bisect.bisect_right(self._vals, b)
        return self._arr[lo:hi]


@dataclass(frozen=True)
class DerivedSet:
    """``S_t = {q : q t in S}``; ``base`` may itself be a :class:`DerivedSet`."""

    base: "ModuliSet | DerivedSet"
    t: int

    def __post_init__(self):
        if self.t < 1:
            raise InvalidArgument(f"t must be >= 1, got {self.t}")

    @property
    def id(self) -> str:
        return f"{self.base.id}_{self.t}"

    def contains(self, q: int) -> bool:
        return q >= 1 and self.base.contains(q * self.t)

    def __contains__(self, q):
        return self.contains(int(q))

    def members(self, a, b) -> np.ndarray:
        return self.base.derived_members(self.t, a, b)

    def derived_members(self, t, a, b):
        m = self.members(a * t, b * t)
        return m[m % t == 0] // t

    def derive(self, t: int) -> "DerivedSet":
        return DerivedSet(self, t)

    def window(self, R: float) -> np.ndarray:
        """``S_t(R)``: members with ``R < q <= 2R``."""
        return self.members(math.floor(R), math.floor(2 * R))


def dyadic(S, R: float) -> np.ndarray:
    """``S(R) = {q in S : R < q <= 2R}``."""
    return S.members(math.floor(R), math.floor(2 * R))


def count_in_progression(D, x: float, y: float, k: int, l: int) -> int:
    """``#{q in D : x <= q <= x + y, q = l mod k}``."""
    if k < 1:
        raise InvalidArgument(f"k must be >= 1, got {k}")
    if y < 0:
        raise InvalidArgument(f"y must be >= 0, got {y}")
    if math.gcd(k, l) != 1:
        raise InvalidArgument(f"gcd(k, l) = gcd({k}, {l}) must be 1")
    q = D.members(math.ceil(x) - 1, math.floor(x + y))
    return int(np.count_nonzero(q % k == l % k))


@dataclass(frozen=True)
class WellDistReport:
    t: int
    R: float
    k: int
    l: int
    x: float
    y: float
    eps: float
    observed: int
    majorant: float
    ratio: float


def well_distribution_scan(S, R_list, t_list, k_max: int, eps: float = 0.1, windows=(1, 2, 4, 8)):
    """Scan the well-distribution inequality over a finite parameter grid.

    For every ``t``, ``R``, ``k <= k_max`` and ``l`` coprime to ``k``, windows
    ``[x, x + y]`` with ``y = R / w`` for ``w`` in ``windows`` are slid across
    ``[R, 2R]`` in steps of ``y / 2``.  Each report keeps the window that
    maximises observed / majorant, with majorant
    ``(|S_t(R)| y / (k R) + 1) (R t)^eps``.  Use :func:`max_ratio` for the
    global constant.
    """
    if eps <= 0:
        raise InvalidArgument(f"eps must be > 0, got {eps}")
    reports = []
    for t in t_list:
        D = DerivedSet(S, int(t))
        for R in R_list:
            size = len(D.window(R))
            cand = D.members(math.ceil(R) - 1, math.floor(2 * R))
            boost = (R * t) ** eps
            for k in range(1, k_max + 1):
                for l in range(k):
                    if math.gcd(k, l) != 1:
                        continue
                    sel = cand[cand % k == l % k]
                    best = None
                    for w in windows:
                        y = R / w
                        majorant = (size * y / (k * R) + 1) * boost
                        x = float(R)
                        while x + y <= 2 * R + 1e-9:
                            lo = np.searchsorted(sel, math.ceil(x), side="left")
                            hi = np.searchsorted(sel, math.floor(x + y), side="right")
                            obs = int(hi - lo)
                            ratio = obs / majorant
                            if best is None or ratio > best.ratio:
                                best = WellDistReport(int(t), R, k, l, x, y, eps, obs, majorant, ratio)
                            x += y / 2
                    reports.append(best)
    return reports


def max_ratio(reports) -> float:
    return max((r.ratio for r in reports), default=0.0)


def set_size(S, Q: float) -> int:
    return len(dyadic(S, Q))


def condition_23_ratio(S, Q: int, q: int, eps: float = 0.1) -> float:
    """``|S_q(Q/q)| q^eps / |S(Q)|``, the constant the sub-set condition demands."""
    if not 1 <= q <= Q:
        raise InvalidArgument(f"need 1 <= q <= Q, got q={q}, Q={Q}")
    size = set_size(S, Q)
    if size == 0:
        raise DegenerateInput(f"|S(Q)| = 0 for Q={Q}; ratio undefined")
    sub = len(DerivedSet(S, q).window(Q / q))
    return sub * q**eps / size


def condition_24_check(S, Q_list):
    """Rows ``(Q, |S(Q)|, |S(Q)|/sqrt(Q), |S(Q)|/Q^(3/4))``."""
    if not len(Q_list):
        raise InvalidArgument("Q_list must be non-empty")
    rows = []
    for Q in Q_list:
        n = set_size(S, Q)
        rows.append((Q, n, n / math.sqrt(Q), n / Q**0.75))
    return rows


def parse_set(spec: str) -> ModuliSet:
    """``squares | all | squarefree | file:PATH``."""
    if spec == "squares":
        return Squares()
    if spec == "all":
        return AllNaturals()
    if spec == "squarefree":
        return Squarefree()
    if spec.startswith("file:"):
        return ExplicitList.from_file(spec[5:])
    raise InvalidArgument(f"unknown set {spec!r}; expected squares|all|squarefree|file:PATH")
