"""Dirichlet characters: group construction, conductors, Gauss sums.

A character mod ``q`` is stored as an integer exponent vector over a fixed
generator basis of ``(Z/qZ)*`` (one cyclic generator per odd prime power,
``-1`` for ``4 | q`` and ``{-1, 5}`` for ``8 | q``).  Values are produced as
``exp(2*pi*i*k/L)`` from an exact integer phase ``k mod L`` where ``L`` is the
group exponent, so no error accumulates through repeated multiplication.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .arithmetic import factorize
from .errors import InvalidArgument


def _primitive_root(p: int) -> int:
    """Smallest primitive root mod the odd prime ``p``."""
    if p == 2:
        return 1
    order = p - 1
    prime_divs = [r for r, _ in factorize(order)]
    for g in range(2, p):
        if all(pow(g, order // r, p) != 1 for r in prime_divs):
            return g
    raise AssertionError(f"no primitive root mod {p}")


@dataclass(frozen=True)
class _Component:
    p: int
    k: int
    m: int
    # local generators (residues mod m) and their orders
    gens: tuple[int, ...]
    orders: tuple[int, ...]
    # logs[r] = exponent vector of r mod m (shape (m, len(gens)), -1 if p | r)
    logs: np.ndarray = field(compare=False, repr=False)


def _component(p: int, k: int) -> _Component:
    m = p**k
    if p == 2 and k == 1:
        gens, orders = (), ()
        logs = np.zeros((m, 0), dtype=np.int64)
        return _Component(p, k, m, gens, orders, logs)
    if p == 2 and k == 2:
        logs = np.full((m, 1), -1, dtype=np.int64)
        logs[1, 0], logs[3, 0] = 0, 1
        return _Component(p, k, m, (3,), (2,), logs)
    if p == 2:
        # n = (-1)^a * 5^b mod 2^k
        gens, orders = (m - 1, 5), (2, 2 ** (k - 2))
        logs = np.full((m, 2), -1, dtype=np.int64)
        h = 1
        for b in range(orders[1]):
            logs[h] = (0, b)
            logs[(-h) % m] = (1, b)
            h = h * 5 % m
        return _Component(p, k, m, gens, orders, logs)

    g = _primitive_root(p)
    # a primitive root mod p lifts to one mod p^k unless g^(p-1) = 1 mod p^2
    if k > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    order = m // p * (p - 1)
    logs = np.full((m, 1), -1, dtype=np.int64)
    h = 1
    for j in range(order):
        logs[h, 0] = j
        h = h * g % m
    return _Component(p, k, m, (g,), (order,), logs)


class CharacterGroup:
    """The full group of Dirichlet characters modulo ``q``.

    Attributes
    ----------
    modulus : int
    generators : list of (residue mod q, order)
        One entry per cyclic factor of ``(Z/qZ)*``, lifted by CRT so that the
        residue is 1 modulo every other prime-power part of ``q``.
    characters : list of Character
        Lexicographic in exponent vector; index 0 is the principal character.
    """

    def __init__(self, q: int):
        q = int(q)
        if q < 1:
            raise InvalidArgument(f"modulus must be >= 1, got {q}")
        self.modulus = q
        self._components = [_component(p, k) for p, k in factorize(q)] if q > 1 else []

        gens: list[tuple[int, int]] = []
        cols = []
        self._comp_cols: list[tuple[int, int]] = []
        residues = np.arange(q, dtype=np.int64)
        for comp in self._components:
            start = len(gens)
            cofactor = q // comp.m
            inv = pow(cofactor, -1, comp.m) if comp.m > 1 else 0
            for g, o in zip(comp.gens, comp.orders):
                # x = g mod m, x = 1 mod cofactor
                x = (1 + cofactor * ((g - 1) * inv % comp.m)) % q
                gens.append((x, o))
            cols.append(comp.logs[residues % comp.m])
            self._comp_cols.append((start, len(gens)))
        self.generators = gens
        self.orders = tuple(o for _, o in gens)
        self.exponent = math.lcm(*self.orders) if self.orders else 1
        logs = np.concatenate(cols, axis=1) if cols else np.zeros((q, 0), dtype=np.int64)
        self.coprime = np.array([math.gcd(int(r), q) == 1 for r in range(q)], dtype=bool)
        logs[~self.coprime] = 0
        self._logs = logs
        self._scale = np.array([self.exponent // o for o in self.orders], dtype=np.int64)
        self._roots = np.exp(2j * np.pi * np.arange(self.exponent) / self.exponent)

        self.characters = [
            Character(self, tuple(e)) for e in itertools.product(*(range(o) for o in self.orders))
        ]

    def __len__(self):
        return len(self.characters)

    def __iter__(self):
        return iter(self.characters)

    def __repr__(self):
        return f"CharacterGroup(q={self.modulus}, order={len(self)})"

    def phases(self, chars=None) -> np.ndarray:
        """Integer phases ``k`` with ``chi(r) = exp(2 pi i k / exponent)``; shape (n_chars, q)."""
        chars = self.characters if chars is None else chars
        if not chars:
            return np.zeros((0, self.modulus), dtype=np.int64)
        E = np.array([c.exponents for c in chars], dtype=np.int64).reshape(len(chars), -1)
        return ((E * self._scale) @ self._logs.T) % self.exponent

    def value_matrix(self, chars=None) -> np.ndarray:
        """Complex values ``chi(r)`` for ``r = 0..q-1``; zero off the units."""
        vals = self._roots[self.phases(chars)]
        vals[:, ~self.coprime] = 0
        return vals

    def primitive(self) -> list["Character"]:
        return [c for c in self.characters if c.is_primitive]

    def principal(self) -> "Character":
        return self.characters[0]

    def by_exponents(self, exps) -> "Character":
        exps = tuple(int(e) % o for e, o in zip(exps, self.orders))
        idx = 0
        for e, o in zip(exps, self.orders):
            idx = idx * o + e
        return self.characters[idx]

    def _local_conductor(self, comp_index: int, exps) -> int:
        comp = self._components[comp_index]
        lo, hi = self._comp_cols[comp_index]
        local = np.array(exps[lo:hi], dtype=np.int64)
        if not local.any():
            return 1
        L = math.lcm(*comp.orders)
        scale = np.array([L // o for o in comp.orders], dtype=np.int64)
        r = np.arange(comp.m)
        unit = r % comp.p != 0
        ph = (comp.logs @ (local * scale)) % L
        for j in range(1, comp.k + 1):
            d = comp.p**j
            sel = unit & (r % d == 1)
            if not ph[sel].any():
                return d
        return comp.m


@dataclass(frozen=True, eq=False)
class Character:
    """A Dirichlet character, identified by modulus and exponent vector."""

    group: CharacterGroup = field(compare=False, repr=False)
    exponents: tuple[int, ...]

    @property
    def modulus(self) -> int:
        return self.group.modulus

    def __hash__(self):
        return hash((self.modulus, self.exponents))

    def __eq__(self, other):
        if not isinstance(other, Character):
            return NotImplemented
        return self.modulus == other.modulus and self.exponents == other.exponents

    def __repr__(self):
        return f"Character(q={self.modulus}, exponents={self.exponents})"

    @property
    def is_principal(self) -> bool:
        return not any(self.exponents)

    @property
    def conductor(self) -> int:
        return _conductor(self)

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def order(self) -> int:
        parts = [o // math.gcd(e, o) for e, o in zip(self.exponents, self.group.orders)]
        return math.lcm(*parts) if parts else 1

    def phase(self, n: int) -> int | None:
        """Integer ``k`` with ``chi(n) = e(k / exponent)``, ``None`` if ``gcd(n, q) > 1``."""
        g = self.group
        r = n % g.modulus
        if not g.coprime[r]:
            return None
        if not self.exponents:
            return 0
        return int((g._logs[r] * g._scale) @ np.array(self.exponents, dtype=np.int64)) % g.exponent

    def __call__(self, n):
        """Evaluate at an integer or an integer array."""
        if np.ndim(n) == 0:
            k = self.phase(int(n))
            return 0j if k is None else complex(self.group._roots[k])
        return self.values()[np.asarray(n, dtype=np.int64) % self.modulus]

    def values(self) -> np.ndarray:
        """Value table ``chi(r)`` for ``r = 0..q-1``."""
        return _values(self)


@lru_cache(maxsize=4096)
def _conductor(chi: Character) -> int:
    g = chi.group
    f = 1
    for i in range(len(g._components)):
        f *= g._local_conductor(i, chi.exponents)
    return f


@lru_cache(maxsize=4096)
def _values(chi: Character) -> np.ndarray:
    v = chi.group.value_matrix([chi])[0]
    v.setflags(write=False)
    return v


@lru_cache(maxsize=512)
def character_group(q: int) -> CharacterGroup:
    """The (cached, immutable) group of characters mod ``q``."""
    if int(q) < 1:
        raise InvalidArgument(f"modulus must be >= 1, got {q}")
    return CharacterGroup(int(q))


def eval_char(chi: Character, n: int) -> complex:
    return chi(n)


def inducing_primitive(chi: Character) -> Character:
    """The primitive character mod ``conductor(chi)`` that induces ``chi``."""
    f = chi.conductor
    if f == chi.modulus:
        return chi
    q = chi.modulus
    target = character_group(f)
    ratio = chi.group.exponent
    exps = []
    for gen, order in target.generators:
        # lift the generator to a unit mod q in the same class mod f
        n = gen
        while math.gcd(n, q) != 1:
            n += f
        k = chi.phase(n)
        # chi(n) has order dividing ``order``, so k * order / L is an integer
        exps.append(k * order // ratio)
    return target.by_exponents(exps)


def gauss_sum(chi: Character) -> complex:
    """``tau(chi) = sum_{a mod q} chi(a) e(a/q)``."""
    q = chi.modulus
    a = np.arange(q)
    return complex(np.sum(chi.values() * np.exp(2j * np.pi * a / q)))


def _window_counts(q: int, M: int, N: int) -> np.ndarray:
    r = np.arange(q, dtype=np.int64)
    return (M + N - r) // q - (M - r) // q


def char_interval_sum(chi: Character, M: int, N: int) -> complex:
    """``sum_{M < n <= M + N} chi(n)``."""
    if N < 1:
        raise InvalidArgument(f"N must be >= 1, got {N}")
    cnt = _window_counts(chi.modulus, int(M), int(N))
    return complex(np.dot(chi.values(), cnt))


def polya_vinogradov_bound(q: int) -> float:
    return 6.0 * math.sqrt(q) * math.log(q)


def polya_vinogradov_check(chi: Character, M: int, N: int) -> tuple[float, float]:
    """``(|sum_{M<n<=M+N} chi(n)|, 6 sqrt(q) log q)`` for non-principal ``chi``."""
    if chi.is_principal:
        raise InvalidArgument("the Polya-Vinogradov bound holds only for non-principal characters")
    return abs(char_interval_sum(chi, M, N)), polya_vinogradov_bound(chi.modulus)


def count_primitive(q: int) -> int:
    return sum(1 for c in character_group(q) if c.is_primitive)
