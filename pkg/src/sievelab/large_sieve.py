"""Large-sieve left-hand sides and candidate bounds.

Every inner sum is reduced modulo ``q`` first (``A_r = sum_{n = r mod q} a_n``)
so the cost per modulus is ``O(q^2)`` for the additive form and
``O(q * #primitive(q))`` for the character form, independent of ``N``.
All bounds use implied constant 1 with ``eps`` passed explicitly; the
reported ratios are for judging constants empirically.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dirichlet import character_group
from .errors import InvalidArgument, ResourceLimit
from .sparse_sets import DerivedSet, Squares

SEQUENCE_TAGS = ("all-ones", "single-spike", "random-unit", "random-gaussian", "user", "zero")

#: largest M * N accepted by the bilinear evaluator
MAX_PRODUCTS = 250_000


@dataclass(frozen=True)
class CoeffSequence:
    """Coefficients ``a_n`` for ``offset < n <= offset + N``."""

    offset: int
    values: np.ndarray = field(repr=False)
    tag: str = "user"
    seed: int | None = None

    def __post_init__(self):
        if self.tag not in SEQUENCE_TAGS:
            raise InvalidArgument(f"unknown sequence tag {self.tag!r}")
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.ndim != 1 or vals.size < 1:
            raise InvalidArgument("a sequence needs at least one coefficient")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.tag != "zero" and self.norm == 0:
            raise InvalidArgument("all-zero coefficients need the explicit 'zero' tag")

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.offset + 1, self.offset + self.N + 1, dtype=np.int64)

    @property
    def norm(self) -> float:
        """``Z = sum |a_n|^2``."""
        return math.fsum((np.abs(self.values) ** 2).tolist())

    def scaled(self, c: complex) -> "CoeffSequence":
        return CoeffSequence(self.offset, self.values * c, "user", self.seed)

    def describe(self) -> dict:
        return {"tag": self.tag, "N": self.N, "offset": self.offset, "seed": self.seed}

    @classmethod
    def all_ones(cls, N: int, offset: int = 0):
        return cls(offset, np.ones(N), "all-ones")

    @classmethod
    def spike(cls, N: int, n0: int, offset: int = 0):
        if not offset < n0 <= offset + N:
            raise InvalidArgument(f"spike position {n0} outside ({offset}, {offset + N}]")
        v = np.zeros(N, dtype=np.complex128)
        v[n0 - offset - 1] = 1
        return cls(offset, v, "single-spike")

    @classmethod
    def random_unit(cls, N: int, seed: int, offset: int = 0):
        rng = np.random.default_rng(seed)
        return cls(offset, np.exp(2j * np.pi * rng.random(N)), "random-unit", seed)

    @classmethod
    def random_gaussian(cls, N: int, seed: int, offset: int = 0):
        rng = np.random.default_rng(seed)
        v = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) / math.sqrt(2)
        return cls(offset, v, "random-gaussian", seed)

    @classmethod
    def zero(cls, N: int, offset: int = 0):
        return cls(offset, np.zeros(N), "zero")

    @classmethod
    def make(cls, tag: str, N: int, seed: int = 0, offset: int = 0, n0: int | None = None):
        """Build a sequence from its tag (the CLI entry point)."""
        if tag == "all-ones":
            return cls.all_ones(N, offset)
        if tag == "single-spike":
            return cls.spike(N, offset + 1 if n0 is None else n0, offset)
        if tag == "random-unit":
            return cls.random_unit(N, seed, offset)
        if tag == "random-gaussian":
            return cls.random_gaussian(N, seed, offset)
        if tag == "zero":
            return cls.zero(N, offset)
        raise InvalidArgument(f"cannot build a {tag!r} sequence from parameters")


def residue_sums(seq: CoeffSequence, q: int) -> np.ndarray:
    """``A_r = sum_{n = r mod q} a_n`` for ``r = 0..q-1``."""
    r = seq.n % q
    re = np.bincount(r, weights=seq.values.real, minlength=q)
    im = np.bincount(r, weights=seq.values.imag, minlength=q)
    return re + 1j * im


def farey_energy(q: int, seq: CoeffSequence, coprime_only: bool = True) -> float:
    """``sum_a |sum_n a_n e(a n / q)|^2`` over ``a mod q`` (reduced residues by default)."""
    A = residue_sums(seq, q)
    a = np.arange(q, dtype=np.int64)
    if coprime_only:
        a = a[np.gcd(a, q) == 1]
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    F = roots[np.outer(a, np.arange(q)) % q] @ A
    return math.fsum((np.abs(F) ** 2).tolist())


def character_energy(q: int, seq: CoeffSequence) -> float:
    """``(q / phi(q)) sum_{chi primitive mod q} |sum_n a_n chi(n)|^2``."""
    G = character_group(q)
    prim = G.primitive()
    if not prim:
        return 0.0
    V = G.value_matrix(prim)
    S = V @ residue_sums(seq, q)
    return q / len(G) * math.fsum((np.abs(S) ** 2).tolist())


def _sum_over(moduli, fn, threads: int = 1) -> tuple[float, list[float]]:
    moduli = [int(q) for q in moduli]
    if threads > 1 and len(moduli) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(fn, moduli))
    else:
        parts = [fn(q) for q in moduli]
    return math.fsum(parts), parts


def sparse_moduli(S, Q: int, t: int) -> np.ndarray:
    """``S_t(Q/t)``; requires ``1 <= t <= Q``."""
    if not 1 <= t <= Q:
        raise InvalidArgument(f"need 1 <= t <= Q, got t={t}, Q={Q}")
    return DerivedSet(S, t).window(Q / t)


def additive_lhs(S, Q: int, t: int, seq: CoeffSequence, threads: int = 1) -> float:
    """Farey energy summed over ``q in S_t(Q/t)``; 0 when that set is empty."""
    moduli = sparse_moduli(S, Q, t)
    return _sum_over(moduli, lambda q: farey_energy(q, seq), threads)[0]


def multiplicative_lhs(S, Q: int, t: int, seq: CoeffSequence, threads: int = 1) -> float:
    moduli = sparse_moduli(S, Q, t)
    return _sum_over(moduli, lambda q: character_energy(q, seq), threads)[0]


def _bilinear_q(q, a_seq, b_seq, order, ends, chunk_elems=1 << 21):
    G = character_group(q)
    prim = G.primitive()
    if not prim:
        return 0.0
    V = G.value_matrix(prim)
    am = a_seq.values[None, :] * V[:, a_seq.n % q]
    bn = b_seq.values[None, :] * V[:, b_seq.n % q]
    step = max(1, chunk_elems // (a_seq.N * b_seq.N))
    best = []
    for i in range(0, len(prim), step):
        terms = (am[i : i + step, :, None] * bn[i : i + step, None, :]).reshape(-1, order.size)
        partial = np.cumsum(terms[:, order], axis=1)[:, ends]
        best.extend(np.max(np.abs(partial), axis=1).tolist())
    return q / len(G) * math.fsum(best)


def bilinear_maxX_lhs(
    S, Q: int, t: int, a_seq: CoeffSequence, b_seq: CoeffSequence,
    max_products: int = MAX_PRODUCTS, threads: int = 1,
) -> float:
    """Weighted sum over ``q in S_t(Q/t)`` and primitive ``chi`` of
    ``max_X |sum_{m <= M, n <= N, mn <= X} a_m b_n chi(mn)|``.

    The maximum runs over the distinct products ``mn``, where the truncated
    sum changes; both sequences must start at 1 (offset 0).
    """
    if a_seq.offset != 0 or b_seq.offset != 0:
        raise InvalidArgument("bilinear sequences are indexed from 1 (offset 0)")
    M, N = a_seq.N, b_seq.N
    if M * N > max_products:
        raise ResourceLimit(f"M*N = {M * N} exceeds the work budget {max_products}")
    prod = np.outer(a_seq.n, b_seq.n).ravel()
    order = np.argsort(prod, kind="stable")
    sp = prod[order]
    ends = np.flatnonzero(np.r_[sp[1:] != sp[:-1], True])
    moduli = sparse_moduli(S, Q, t)
    return _sum_over(moduli, lambda q: _bilinear_q(q, a_seq, b_seq, order, ends), threads)[0]


def classical_lhs(Q: int, seq: CoeffSequence, threads: int = 1) -> float:
    return _sum_over(range(1, Q + 1), lambda q: character_energy(q, seq), threads)[0]


def classical_ls_check(Q: int, seq: CoeffSequence, threads: int = 1) -> tuple[float, float]:
    """``(lhs, (Q^2 + N) Z)`` for the multiplicative large sieve over ``q <= Q``."""
    if Q < 1:
        raise InvalidArgument(f"Q must be >= 1, got {Q}")
    return classical_lhs(Q, seq, threads), classical_bound(Q, seq.N, seq.norm)


# --- bounds ---------------------------------------------------------------


def classical_bound(Q: float, N: int, Z: float) -> float:
    return (Q * Q + N) * Z


def delta(Y: float, Q: float, t: float, size: int, eps: float) -> float:
    """``Y + (Q/t) (QY)^eps (sqrt(Y) + |S_t(Q/t)|)``."""
    return Y + Q / t * (Q * Y) ** eps * (math.sqrt(Y) + size)


def sparse_bound(N: int, Q: float, t: float, size: int, eps: float, Z: float) -> float:
    return delta(N, Q, t, size, eps) * Z


def conjecture_bound(N: int, Q: float, t: float, size: int, eps: float, Z: float) -> float:
    return Q**eps * (Q / t * size + N) * Z


def bilinear_bound(M, N, Q, t, size, eps, Za, Zb) -> float:
    return math.log(2 * M * N) * math.sqrt(delta(M, Q, t, size, eps) * delta(N, Q, t, size, eps) * Za * Zb)


# --- experiments ----------------------------------------------------------


@dataclass
class SieveRatioExperiment:
    experiment: str
    params: dict
    sequence: dict
    lhs: float
    bounds: dict
    ratios: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def __post_init__(self):
        if not self.ratios:
            self.ratios = {k: (self.lhs / v if v > 0 else 0.0) for k, v in self.bounds.items()}

    def to_record(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "seed": self.sequence.get("seed"),
            "sequence": self.sequence,
            "lhs": self.lhs,
            "bounds": self.bounds,
            "ratios": self.ratios,
            "flags": self.flags,
        }


def sparse_experiment(S, Q: int, t: int, seq: CoeffSequence, eps: float = 0.1,
                      kind: str = "additive", threads: int = 1) -> SieveRatioExperiment:
    """One sparse large-sieve evaluation with classical, sparse and (for squares) conjectured bounds."""
    moduli = sparse_moduli(S, Q, t)
    if kind == "additive":
        lhs = additive_lhs(S, Q, t, seq, threads)
    elif kind == "multiplicative":
        lhs = multiplicative_lhs(S, Q, t, seq, threads)
    else:
        raise InvalidArgument(f"kind must be additive or multiplicative, got {kind!r}")
    Z, N, size = seq.norm, seq.N, len(moduli)
    bounds = {
        "classical": classical_bound(Q, N, Z),
        "sparse": sparse_bound(N, Q, t, size, eps, Z),
    }
    if isinstance(S, Squares):
        bounds["conjecture"] = conjecture_bound(N, Q, t, size, eps, Z)
    flags = ["empty-moduli"] if size == 0 else []
    params = {"set": S.id, "Q": Q, "t": t, "eps": eps, "moduli_count": size}
    return SieveRatioExperiment(f"ls-sparse-{kind}", params, seq.describe(), lhs, bounds, flags=flags)


def bilinear_experiment(S, Q: int, t: int, a_seq: CoeffSequence, b_seq: CoeffSequence,
                        eps: float = 0.1, threads: int = 1) -> SieveRatioExperiment:
    moduli = sparse_moduli(S, Q, t)
    lhs = bilinear_maxX_lhs(S, Q, t, a_seq, b_seq, threads=threads)
    bound = bilinear_bound(a_seq.N, b_seq.N, Q, t, len(moduli), eps, a_seq.norm, b_seq.norm)
    params = {"set": S.id, "Q": Q, "t": t, "eps": eps, "M": a_seq.N, "N": b_seq.N,
              "moduli_count": len(moduli)}
    seqd = {"a": a_seq.describe(), "b": b_seq.describe(), "seed": a_seq.seed}
    flags = ["empty-moduli"] if len(moduli) == 0 else []
    return SieveRatioExperiment("ls-bilinear", params, seqd, lhs, {"bilinear": bound}, flags=flags)


def conjecture_ratio(Q: int, t: int, seq: CoeffSequence, eps: float = 0.1, threads: int = 1) -> float:
    """Additive energy over squares ``S_t(Q/t)`` divided by ``Q^eps (Q/t |S_t(Q/t)| + N) Z``."""
    S = Squares()
    lhs = additive_lhs(S, Q, t, seq, threads)
    if seq.norm == 0:
        return 0.0
    size = len(sparse_moduli(S, Q, t))
    return lhs / conjecture_bound(seq.N, Q, t, size, eps, seq.norm)


def conjecture_experiment(Q: int, t: int, N: int, eps: float = 0.1, seeds=range(10),
                          tags=("random-unit", "random-gaussian"), threads: int = 1) -> SieveRatioExperiment:
    """Battery of sequences (all-ones, every spike position, seeded random); reports the max ratio."""
    battery = [CoeffSequence.all_ones(N)]
    battery += [CoeffSequence.spike(N, n0) for n0 in range(1, N + 1)]
    battery += [CoeffSequence.make(tag, N, seed=s) for tag in tags for s in seeds]
    best, best_seq = -1.0, None
    for seq in battery:
        r = conjecture_ratio(Q, t, seq, eps, threads)
        if r > best:
            best, best_seq = r, seq
    S = Squares()
    size = len(sparse_moduli(S, Q, t))
    lhs = additive_lhs(S, Q, t, best_seq, threads)
    bound = conjecture_bound(N, Q, t, size, eps, best_seq.norm)
    params = {"set": "squares", "Q": Q, "t": t, "N": N, "eps": eps, "battery_size": len(battery),
              "seeds": list(seeds), "moduli_count": size}
    return SieveRatioExperiment("ls-conjecture", params, best_seq.describe(), lhs,
                                {"conjecture": bound}, {"conjecture": best})
