"""Chebyshev functions in progressions and mean-square / worst-residue error sums.

Sums over ``n <= x`` only touch the prime powers (where Lambda is nonzero);
all reported totals are aggregated with :func:`math.fsum`, which is
correctly rounded and therefore independent of evaluation order.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .arithmetic import SieveTables, build_tables, euler_phi
from .dirichlet import Character
from .errors import InvalidArgument
from .sparse_sets import dyadic

ZETA2 = math.pi**2 / 6


def _fsum_complex(z) -> complex:
    z = np.asarray(z, dtype=np.complex128)
    return complex(math.fsum(z.real.tolist()), math.fsum(z.imag.tolist()))


def prime_powers(tables: SieveTables, y: float) -> tuple[np.ndarray, np.ndarray]:
    """Ascending prime powers ``n <= y`` and their ``Lambda(n)``."""
    Y = math.floor(y)
    tables.require(Y)
    if Y < 2:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    n = np.flatnonzero(tables.lam[: Y + 1]).astype(np.int64)
    return n, tables.lam[n]


def chebyshev_psi(tables: SieveTables, y: float) -> float:
    return math.fsum(prime_powers(tables, y)[1].tolist())


def psi_progression(tables: SieveTables, y: float, q: int, a: int) -> float:
    """``psi(y; q, a) = sum_{n <= y, n = a mod q} Lambda(n)``."""
    if q < 1:
        raise InvalidArgument(f"q must be >= 1, got {q}")
    n, lam = prime_powers(tables, y)
    return math.fsum(lam[n % q == a % q].tolist())


def psi_residues(tables: SieveTables, y: float, q: int) -> np.ndarray:
    """``psi(y; q, a)`` for every ``a = 0..q-1`` at once."""
    n, lam = prime_powers(tables, y)
    return np.bincount(n % q, weights=lam, minlength=q)


def psi_character(tables: SieveTables, y: float, chi: Character, primed: bool = False) -> complex:
    """``psi(y, chi)``; with ``primed``, ``y`` is subtracted for the principal character."""
    n, lam = prime_powers(tables, y)
    val = _fsum_complex(lam * chi.values()[n % chi.modulus])
    if primed and chi.is_principal:
        val -= y
    return val


# --- error-sum reports ----------------------------------------------------


@dataclass
class ErrorRow:
    q: int
    contribution: float
    residue: int | None = None
    y: float | None = None


@dataclass
class ErrorSumReport:
    theorem: str
    x: float
    Q: float
    set_id: str
    A: float
    lhs: float
    normalizer: float
    rows: list[ErrorRow] = field(default_factory=list)
    y_grid: list | str | None = None

    @property
    def ratio(self) -> float:
        return self.lhs / self.normalizer if self.normalizer else math.inf

    def to_record(self) -> dict:
        d = asdict(self)
        d["ratio"] = self.ratio
        return d

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["q", "contribution", "residue", "y"])
        for r in self.rows:
            w.writerow([r.q, f"{r.contribution:.17g}", "" if r.residue is None else r.residue,
                        "" if r.y is None else f"{r.y:.17g}"])
        return buf.getvalue()


def _coprime_mask(m: int) -> np.ndarray:
    return np.gcd(np.arange(m, dtype=np.int64), m) == 1


def _moduli(S, Q, square_weight: bool) -> tuple[list[int], str, str]:
    if square_weight:
        return list(range(1, math.floor(Q) + 1)), "squares", "square"
    if S is None:
        return list(range(1, math.floor(Q) + 1)), "classical", "classical"
    return [int(q) for q in dyadic(S, Q)], S.id, "general"


def _map(fn, items, threads):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def bdh_sum(tables: SieveTables, x: float, Q: float, S=None, square_weight: bool = False,
            A: float = 2.0, threads: int = 1) -> ErrorSumReport:
    """Mean-square progression error summed over moduli.

    * ``S is None``: classical, ``q <= Q``.
    * ``S`` given: ``q in S(Q)`` (that is ``Q < q <= 2Q``).
    * ``square_weight``: ``sum_{q <= Q} q sum_{a mod q^2} |psi(x; q^2, a) - x/phi(q^2)|^2``.
    """
    n, lam = prime_powers(tables, x)
    moduli, set_id, mode = _moduli(S, Q, square_weight)

    def one(q):
        m = q * q if square_weight else q
        phi = euler_phi(m, tables)
        err = (np.bincount(n % m, weights=lam, minlength=m) - x / phi)[_coprime_mask(m)]
        c = math.fsum((err * err).tolist())
        return ErrorRow(q, q * c if square_weight else c)

    rows = _map(one, moduli, threads)
    lhs = math.fsum(r.contribution for r in rows)
    logA = math.log(x) ** A
    if mode == "general":
        norm = len(moduli) / Q * x * x / logA
        tag = "BDH-general"
    else:
        norm = x * x / logA
        tag = "BDH-square" if mode == "square" else "classical-BDH"
    return ErrorSumReport(tag, x, Q, set_id, A, lhs, norm, rows, [x])


def _sup_over_y(n, lam, x, m, phi, coprime):
    """Exact ``sup_{y <= x} max_a |psi(y; m, a) - y/phi|`` with its residue and ``y``."""
    final = np.bincount(n % m, weights=lam, minlength=m) - x / phi
    best = np.where(coprime, np.abs(final), -1.0)
    r = n % m
    keep = coprime[r]
    n, lam, r = n[keep], lam[keep], r[keep]
    if n.size:
        order = np.argsort(r, kind="stable")
        n, lam, r = n[order], lam[order], r[order]
        total = np.cumsum(lam)
        first = np.r_[True, r[1:] != r[:-1]]
        start = np.maximum.accumulate(np.where(first, np.arange(r.size), 0))
        offset = np.where(start > 0, total[start - 1], 0.0)
        after = total - offset
        before = after - lam
        trend = n / phi
        # the left limit y -> n^- and the value at y = n bound each step
        cand = np.maximum(np.abs(before - trend), np.abs(after - trend))
        step_best = np.full(m, -1.0)
        np.maximum.at(step_best, r, cand)
        better = step_best > best
        best = np.where(better, step_best, best)
        a = int(np.argmax(best))
        if better[a]:
            i = np.flatnonzero((r == a) & (cand == step_best[a]))[0]
            return float(best[a]), a, float(n[i])
    a = int(np.argmax(best))
    return float(best[a]), a, float(x)


def bv_sum(tables: SieveTables, x: float, Q: float, S=None, square_weight: bool = False,
           A: float = 2.0, y_grid=None, threads: int = 1) -> ErrorSumReport:
    """Worst-residue progression error summed over moduli.

    ``y_grid`` is ``None`` (only ``y = x``), a list of ``y <= x`` values, or
    ``"exact"`` for the supremum over all real ``y <= x``.  Ties in the
    residue maximum go to the smallest ``a``.
    """
    exact = isinstance(y_grid, str)
    if exact and y_grid != "exact":
        raise InvalidArgument(f"y_grid must be a list of values or 'exact', got {y_grid!r}")
    grid = None if exact else sorted(set([x] if y_grid is None else [float(y) for y in y_grid]))
    if grid is not None and (not grid or grid[-1] > x):
        raise InvalidArgument("y_grid values must not exceed x")
    n, lam = prime_powers(tables, x)
    moduli, set_id, mode = _moduli(S, Q, square_weight)

    def one(q):
        m = q * q if square_weight else q
        phi = euler_phi(m, tables)
        cop = _coprime_mask(m)
        if exact:
            val, a, y = _sup_over_y(n, lam, x, m, phi, cop)
        else:
            val, a, y = -1.0, 0, grid[0]
            for yy in grid:
                sel = n <= yy
                err = np.abs(np.bincount(n[sel] % m, weights=lam[sel], minlength=m) - yy / phi)
                err = np.where(cop, err, -1.0)
                i = int(np.argmax(err))
                if err[i] > val:
                    val, a, y = float(err[i]), i, yy
        return ErrorRow(q, q * val if square_weight else val, a, y)

    rows = _map(one, moduli, threads)
    lhs = math.fsum(r.contribution for r in rows)
    logA = math.log(x) ** A
    if mode == "general":
        norm = len(moduli) / Q * x / logA
        tag = "BV-general"
    else:
        norm = x / logA
        tag = "BV-square" if mode == "square" else "classical-BV"
    return ErrorSumReport(tag, x, Q, set_id, A, lhs, norm, rows, "exact" if exact else grid)


# --- Vaughan identity -----------------------------------------------------


@dataclass
class VaughanDecomposition:
    """``sum_{n<=x} Lambda(n) f(n) = S1 + S2 + S3 + S4`` with

    * ``S1 = sum_{n <= U} Lambda(n) f(n)``
    * ``S2 = -sum_{t <= UV} c(t) sum_{r <= x/t} f(tr)``, ``c(t) = sum_{md=t, m<=U, d<=V} Lambda(m) mu(d)``
    * ``S3 = sum_{d <= V} mu(d) sum_{h <= x/d} log(h) f(dh)``
    * ``S4 = -sum_{m > U} sum_{1 < k <= x/m} Lambda(m) b(k) f(mk)``, ``b(k) = sum_{d | k, d <= V} mu(d)``

    ``pieces`` splits ``S2`` at ``t = U`` into its type-I and type-II parts.
    """

    x: float
    U: float
    V: float
    components: dict
    pieces: dict
    total: complex
    direct: complex
    residual: complex
    type_I_range: tuple
    type_II_range: tuple
    supports: dict
    coefficient_bounds_hold: bool
    ranges_hold: bool

    def to_record(self) -> dict:
        def enc(z):
            z = complex(z)
            return {"re": z.real, "im": z.imag}

        return {
            "x": self.x, "U": self.U, "V": self.V,
            "components": {k: enc(v) for k, v in self.components.items()},
            "pieces": {k: enc(v) for k, v in self.pieces.items()},
            "total": enc(self.total), "direct": enc(self.direct), "residual": enc(self.residual),
            "type_I_range": list(self.type_I_range), "type_II_range": list(self.type_II_range),
            "supports": {k: list(v) for k, v in self.supports.items()},
            "coefficient_bounds_hold": self.coefficient_bounds_hold,
            "ranges_hold": self.ranges_hold,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["component", "re", "im"])
        rows = list(self.components.items()) + [("total", self.total), ("direct", self.direct),
                                                ("residual", self.residual)]
        for name, z in rows:
            z = complex(z)
            w.writerow([name, f"{z.real:.17g}", f"{z.imag:.17g}"])
        return buf.getvalue()


def vaughan_decompose(tables: SieveTables, x: float, U: float, V: float,
                      f: Callable | Character | None = None) -> VaughanDecomposition:
    """Exact four-part Vaughan decomposition of ``sum_{n <= x} Lambda(n) f(n)``.

    ``f`` maps an int64 array to values (a :class:`Character` works as is);
    ``None`` means ``f = 1``.
    """
    if U < 1 or V < 1:
        raise InvalidArgument(f"need U, V >= 1, got U={U}, V={V}")
    if U * V > x:
        raise InvalidArgument(f"need UV <= x, got UV={U * V} > x={x}")
    X, u, v = math.floor(x), math.floor(U), math.floor(V)
    tables.require(X)
    idx = np.arange(X + 1, dtype=np.int64)
    F = np.ones(X + 1, dtype=np.complex128) if f is None else np.asarray(f(idx), dtype=np.complex128)
    F[0] = 0
    lam = tables.lam[: X + 1]
    mu = tables.mu[: X + 1].astype(np.float64)
    logs = np.log(np.maximum(idx, 1).astype(np.float64))

    direct = _fsum_complex(lam * F)
    S1 = _fsum_complex(lam[: u + 1] * F[: u + 1])

    # c(t) for t <= UV
    T = min(u * v, X)
    c = np.zeros(T + 1)
    d = np.arange(1, v + 1)
    for m in range(2, u + 1):
        if lam[m]:
            t = m * d
            ok = t <= T
            np.add.at(c, t[ok], lam[m] * mu[d[ok]])
    tI, tII = [], []
    for t in np.flatnonzero(c).tolist():
        terms = c[t] * F[t::t]
        (tI if t <= u else tII).append(-terms)
    S2_I = _fsum_complex(np.concatenate(tI)) if tI else 0j
    S2_II = _fsum_complex(np.concatenate(tII)) if tII else 0j

    s3 = []
    for dd in range(1, v + 1):
        if mu[dd]:
            h = np.arange(1, X // dd + 1)
            s3.append(mu[dd] * logs[h] * F[dd * h])
    S3 = _fsum_complex(np.concatenate(s3)) if s3 else 0j

    b = np.zeros(X + 1)
    for dd in range(1, v + 1):
        if mu[dd]:
            b[dd::dd] += mu[dd]
    s4, m_support = [], []
    for m in range(u + 1, X // 2 + 1):
        if not lam[m]:
            continue
        k = np.arange(2, X // m + 1)
        bk = b[k]
        if bk.any():
            m_support.append(m)
            s4.append(-lam[m] * bk * F[m * k])
    S4 = _fsum_complex(np.concatenate(s4)) if s4 else 0j

    S2 = _fsum_complex([S2_I, S2_II])
    total = _fsum_complex([S1, S2, S3, S4])

    tau = tables.tau[: X + 1]
    ks = np.arange(1, T + 1)
    coeff_ok = bool(np.all(np.abs(c[1:]) <= logs[ks] + 1e-12)
                    and np.all(np.abs(b[1:]) <= tau[1:]))
    hi = max(X / v, u * v)
    t_support = [t for t in np.flatnonzero(c).tolist() if t > u]
    supports = {
        "S2_typeII_t": (min(t_support), max(t_support)) if t_support else (),
        "S4_m": (min(m_support), max(m_support)) if m_support else (),
    }
    ranges_ok = all(not s or (s[0] > U and s[1] <= hi) for s in supports.values())

    return VaughanDecomposition(
        x=x, U=U, V=V,
        components={"S1": S1, "S2": S2, "S3": S3, "S4": S4},
        pieces={"S2_typeI": S2_I, "S2_typeII": S2_II},
        total=total, direct=direct, residual=total - direct,
        type_I_range=(1, max(u, v)), type_II_range=(U, hi),
        supports=supports, coefficient_bounds_hold=coeff_ok, ranges_hold=ranges_ok,
    )


# --- sum of 1/phi(q^2) ----------------------------------------------------


def phi_square_sum(y: int, tables: SieveTables | None = None) -> tuple[float, float, float]:
    """``(sum_{y < q <= 2y} 1/phi(q^2), 1/(2 zeta(2) y), difference)``."""
    y = int(y)
    if y < 1:
        raise InvalidArgument(f"y must be >= 1, got {y}")
    if tables is None or tables.x_max < 2 * y:
        tables = build_tables(max(2 * y, 2))
    q = np.arange(y + 1, 2 * y + 1, dtype=np.int64)
    # phi(q^2) = q phi(q), exact in int64 for q <= 3e9
    denom = q * tables.phi[q]
    s = math.fsum((1.0 / denom).tolist())
    main = 1.0 / (2 * ZETA2 * y)
    return s, main, s - main
