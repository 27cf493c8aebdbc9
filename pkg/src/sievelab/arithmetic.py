"""Multiplicative-function tables and small-integer arithmetic.

Every other module reads from a :class:`SieveTables` instance, which holds
Lambda, phi, mu, tau, the smallest prime factor and the squarefree kernel
for all ``n <= x_max``.  Tables are built by a (optionally segmented) sieve
that peels the base primes ``p <= sqrt(x_max)`` off each block and treats the
remaining cofactor as a single large prime.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgument, OutOfTable, ResourceLimit

INT64_MAX = 2**63 - 1

#: single-pass build below this many entries, segmented above it
SEGMENT_THRESHOLD = 1 << 26
SEGMENT_SIZE = 1 << 24

#: bytes per table entry (spf, lambda, phi, kernel: 8; tau: 4; mu: 1)
BYTES_PER_ENTRY = 37
DEFAULT_MEMORY_BUDGET = 4 * 2**30

CACHE_MAGIC = b"SLAB1"


@dataclass(frozen=True, eq=False)
class SieveTables:
    """Arithmetic tables indexed by ``n`` for ``0 <= n <= x_max``.

    ``lam`` is the von Mangoldt table.  Index 0 holds zeros everywhere.
    Arrays are flagged read-only after construction, so instances can be
    shared freely.
    """

    x_max: int
    spf: np.ndarray
    primes: np.ndarray
    lam: np.ndarray
    phi: np.ndarray
    mu: np.ndarray
    tau: np.ndarray
    kernel: np.ndarray

    def __post_init__(self):
        for arr in (self.spf, self.primes, self.lam, self.phi, self.mu, self.tau, self.kernel):
            arr.setflags(write=False)

    def require(self, n: int) -> None:
        if n > self.x_max:
            raise OutOfTable(f"need tables up to {n}, have x_max={self.x_max}")

    def nbytes(self) -> int:
        return sum(
            a.nbytes
            for a in (self.spf, self.primes, self.lam, self.phi, self.mu, self.tau, self.kernel)
        )


def _base_primes(limit: int) -> np.ndarray:
    """Plain Eratosthenes up to ``limit`` (inclusive)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def _sieve_block(lo, hi, base, spf, lam, phi, mu, tau, kernel):
    """Fill entries ``lo <= n < hi`` (``lo >= 1``) of the output tables."""
    size = hi - lo
    rem = np.arange(lo, hi, dtype=np.int64)
    b_spf = np.zeros(size, dtype=np.int64)
    b_phi = np.ones(size, dtype=np.int64)
    b_mu = np.ones(size, dtype=np.int8)
    b_tau = np.ones(size, dtype=np.int32)
    b_ker = np.ones(size, dtype=np.int64)
    omega = np.zeros(size, dtype=np.int8)

    top = hi - 1
    for p in base.tolist():
        if p * p > top:
            break
        start = -(-lo // p) * p
        if start >= hi:
            continue
        off = start - lo
        sub = rem[off::p]
        e = np.zeros(sub.shape[0], dtype=np.int64)
        while True:
            hit = sub % p == 0
            if not hit.any():
                break
            sub[hit] //= p
            e += hit
        s = b_spf[off::p]
        s[s == 0] = p
        b_phi[off::p] *= (p - 1) * np.power(np.int64(p), e - 1)
        b_tau[off::p] *= (e + 1).astype(np.int32)
        kv = b_ker[off::p]
        kv[(e & 1) == 1] *= p
        mv = b_mu[off::p]
        mv *= -1
        mv[e >= 2] = 0
        omega[off::p] += 1

    big = rem > 1
    cof = rem[big]
    b_phi[big] *= cof - 1
    b_tau[big] *= 2
    b_ker[big] *= cof
    b_mu[big] *= -1
    omega[big] += 1
    s = b_spf[big]
    b_spf[big] = np.where(s == 0, cof, s)

    if lo == 1:
        b_spf[0] = 1

    sl = slice(lo, hi)
    spf[sl] = b_spf
    phi[sl] = b_phi
    mu[sl] = b_mu
    tau[sl] = b_tau
    kernel[sl] = b_ker
    # exact log of the integer prime, identical for every power p^k
    lam[sl] = np.where(omega == 1, np.log(b_spf.astype(np.float64)), 0.0)


def estimate_bytes(x_max: int) -> int:
    return BYTES_PER_ENTRY * (x_max + 1)


def build_tables(x_max: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SieveTables:
    """Build every arithmetic table for ``0 <= n <= x_max``.

    Raises
    ------
    InvalidArgument
        If ``x_max < 2``.
    ResourceLimit
        If the tables would exceed ``memory_budget`` bytes.
    """
    x_max = int(x_max)
    if x_max < 2:
        raise InvalidArgument(f"x_max must be >= 2, got {x_max}")
    if estimate_bytes(x_max) > memory_budget:
        raise ResourceLimit(
            f"tables for x_max={x_max} need ~{estimate_bytes(x_max)} bytes, "
            f"budget is {memory_budget}"
        )
    n = x_max + 1
    spf = np.zeros(n, dtype=np.int64)
    lam = np.zeros(n, dtype=np.float64)
    phi = np.zeros(n, dtype=np.int64)
    mu = np.zeros(n, dtype=np.int8)
    tau = np.zeros(n, dtype=np.int32)
    kernel = np.zeros(n, dtype=np.int64)

    base = _base_primes(math.isqrt(x_max))
    step = n if n <= SEGMENT_THRESHOLD else SEGMENT_SIZE
    lo = 1
    while lo < n:
        hi = min(lo + step, n)
        _sieve_block(lo, hi, base, spf, lam, phi, mu, tau, kernel)
        lo = hi

    idx = np.arange(n, dtype=np.int64)
    primes = idx[(spf == idx) & (idx >= 2)]
    return SieveTables(x_max, spf, primes, lam, phi, mu, tau, kernel)


# ---------------------------------------------------------------------------
# binary cache

_CACHE_FIELDS = (
    ("spf", "<i8"),
    ("lam", "<f8"),
    ("phi", "<i8"),
    ("mu", "<i1"),
    ("tau", "<i4"),
    ("kernel", "<i8"),
)


def save_tables(tables: SieveTables, path) -> None:
    """Write tables as ``SLAB1 | x_max:u64 | n_primes:u64 | primes | tables...``."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<QQ", tables.x_max, len(tables.primes)))
        fh.write(np.ascontiguousarray(tables.primes, dtype="<i8").tobytes())
        for name, dt in _CACHE_FIELDS:
            fh.write(np.ascontiguousarray(getattr(tables, name), dtype=dt).tobytes())


def load_tables(path, x_max: int | None = None) -> SieveTables | None:
    """Read a cache file; ``None`` if missing, malformed or for another ``x_max``."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError:
        return None
    head = len(CACHE_MAGIC) + 16
    if len(raw) < head or raw[: len(CACHE_MAGIC)] != CACHE_MAGIC:
        return None
    stored, n_primes = struct.unpack_from("<QQ", raw, len(CACHE_MAGIC))
    if x_max is not None and stored != x_max:
        return None
    n = stored + 1
    expected = head + 8 * n_primes + n * sum(np.dtype(dt).itemsize for _, dt in _CACHE_FIELDS)
    if len(raw) != expected:
        return None
    pos = head
    primes = np.frombuffer(raw, dtype="<i8", count=n_primes, offset=pos).astype(np.int64)
    pos += 8 * n_primes
    arrays = {}
    for name, dt in _CACHE_FIELDS:
        a = np.frombuffer(raw, dtype=dt, count=n, offset=pos)
        pos += a.nbytes
        arrays[name] = a.astype(np.dtype(dt).newbyteorder("="))
    return SieveTables(int(stored), primes=primes, **arrays)


def cached_tables(x_max: int, cache_dir=None, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SieveTables:
    """Load tables from ``cache_dir`` (default ``$SIEVELAB_CACHE``), building on miss."""
    cache_dir = cache_dir or os.environ.get("SIEVELAB_CACHE")
    if not cache_dir:
        return build_tables(x_max, memory_budget)
    path = Path(cache_dir) / f"tables_{x_max}.slab"
    tables = load_tables(path, x_max)
    if tables is None:
        tables = build_tables(x_max, memory_budget)
        path.parent.mkdir(parents=True, exist_ok=True)
        save_tables(tables, path)
    return tables


# ---------------------------------------------------------------------------
# scalar helpers


def _check_natural(n: int, name: str = "n") -> int:
    n = int(n)
    if n < 1:
        raise InvalidArgument(f"{name} must be >= 1, got {n}")
    if n > INT64_MAX:
        raise ResourceLimit(f"{name}={n} exceeds the 64-bit range")
    return n


def factorize(n: int, tables: SieveTables | None = None) -> list[tuple[int, int]]:
    """Prime factorisation of ``n`` as ascending ``(p, e)`` pairs.

    Uses the spf table when ``n <= x_max``; otherwise trial division by the
    tabled primes, continued over odd integers if the table is too short.
    A cofactor left after dividing up to its square root is prime.
    """
    n = _check_natural(n)
    out: list[tuple[int, int]] = []
    if tables is not None and n <= tables.x_max:
        spf = tables.spf
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def peel(d):
        nonlocal n
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            out.append((d, e))

    last = 1
    if tables is not None:
        for p in tables.primes.tolist():
            if p * p > n:
                break
            peel(p)
            last = p
    if last < 2:
        peel(2)
        last = 2
    d = last + 1 if last == 2 else last + 2
    while d * d <= n:
        peel(d)
        d += 2
    if n > 1:
        out.append((n, 1))
    return out


def squarefree_kernel(n: int, tables: SieveTables | None = None) -> int:
    """The squarefree ``a`` with ``n = a * m**2``.

    >>> squarefree_kernel(360)
    10
    """
    n = _check_natural(n)
    if tables is not None and n <= tables.x_max:
        return int(tables.kernel[n])
    a = 1
    for p, e in factorize(n, tables):
        if e & 1:
            a *= p
    return a


def euler_phi(n: int, tables: SieveTables | None = None) -> int:
    n = _check_natural(n)
    if tables is not None and n <= tables.x_max:
        return int(tables.phi[n])
    r = n
    for p, _ in factorize(n, tables):
        r = r // p * (p - 1)
    return r


def euler_phi_qsq(q: int, tables: SieveTables | None = None) -> int:
    """phi(q**2), computed as ``q * phi(q)`` in exact integers."""
    q = _check_natural(q, "q")
    r = q * euler_phi(q, tables)
    if r > INT64_MAX:
        raise ResourceLimit(f"phi({q}^2) = {r} exceeds the 64-bit range")
    return r


def divisors(n: int, tables: SieveTables | None = None) -> list[int]:
    """Ascending list of the positive divisors of ``n``."""
    ds = [1]
    for p, e in factorize(n, tables):
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)
