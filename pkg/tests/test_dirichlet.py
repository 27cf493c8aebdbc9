import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sievelab.arithmetic import divisors, euler_phi, factorize
from sievelab.dirichlet import (
    char_interval_sum, character_group, count_primitive, eval_char, gauss_sum,
    inducing_primitive, polya_vinogradov_bound, polya_vinogradov_check,
)
from sievelab.errors import InvalidArgument


def brute_conductor(chi):
    """Smallest d | q such that chi is 1 on every unit n = 1 mod d."""
    q = chi.modulus
    vals = chi.values()
    for d in divisors(q):
        if all(abs(vals[n] - 1) < 1e-9 for n in range(1, q) if math.gcd(n, q) == 1 and n % d == 1 % d):
            return d
    return q


def legendre(q):
    return next(c for c in character_group(q) if c.order == 2)


def test_group_examples():
    G1 = character_group(1)
    assert len(G1) == 1 and G1.characters[0].conductor == 1
    G5 = character_group(5)
    assert len(G5) == 4
    gen = next(c for c in G5 if c.order == 4)
    assert sorted(round(cmath.phase(gen(2) ** k) % (2 * math.pi), 9) for k in range(4)) == sorted(
        round(math.pi / 2 * k, 9) for k in range(4))
    assert sorted(c.conductor for c in character_group(8)) == [1, 4, 8, 8]


def test_eval_examples():
    assert eval_char(character_group(6).principal(), 35) == 1
    assert all(eval_char(c, 3) == 0 for c in character_group(6))
    chi = next(c for c in character_group(5) if c.order == 4)
    assert abs(eval_char(chi, 4) + 1) < 1e-12
    assert eval_char(chi, -1) == eval_char(chi, 4)


def test_inducing_examples():
    assert inducing_primitive(character_group(12).principal()).modulus == 1
    for c in character_group(7).primitive():
        assert inducing_primitive(c) == c
    c8 = next(c for c in character_group(8) if c.conductor == 4)
    c4 = inducing_primitive(c8)
    assert c4.modulus == 4 and not c4.is_principal
    for n in (1, 3, 5, 7):
        assert abs(c8(n) - c4(n)) < 1e-12


@given(st.integers(1, 120), st.data())
def test_inducing_agrees_on_units(q, data):
    G = character_group(q)
    chi = G.characters[data.draw(st.integers(0, len(G) - 1))]
    psi = inducing_primitive(chi)
    assert psi.is_primitive and psi.modulus == chi.conductor
    for n in range(1, 3 * q):
        if math.gcd(n, q) == 1:
            assert abs(chi(n) - psi(n)) < 1e-9


def test_gauss_examples():
    assert abs(gauss_sum(legendre(5)) - math.sqrt(5)) < 1e-12
    assert abs(gauss_sum(character_group(4).principal())) < 1e-12
    for c in character_group(7).primitive():
        assert abs(abs(gauss_sum(c)) - math.sqrt(7)) < 1e-6


def test_interval_examples():
    chi3 = next(c for c in character_group(3) if not c.is_principal)
    assert abs(char_interval_sum(chi3, 0, 3)) < 1e-12
    assert char_interval_sum(character_group(1).principal(), 0, 5) == 5
    assert abs(char_interval_sum(legendre(7), 0, 3) - 1) < 1e-12


def test_orthogonality_exhaustive():
    for q in range(1, 61):
        G = character_group(q)
        V = G.value_matrix()
        gram = V @ V.conj().T
        assert np.allclose(gram, len(G) * np.eye(len(G)), atol=1e-6)
        units = np.flatnonzero(G.coprime)
        col = V[:, units]
        dual = col.T @ col.conj()
        assert np.allclose(dual, len(G) * np.eye(units.size), atol=1e-6)
        assert len(G) == euler_phi(q)


def test_conductor_and_primitive_count_against_brute_force():
    for q in range(1, 101):
        G = character_group(q)
        conds = [brute_conductor(c) for c in G]
        assert conds == [c.conductor for c in G], q
        expected = sum(_mobius(q // d) * euler_phi(d) for d in divisors(q))
        assert count_primitive(q) == expected == sum(c == q for c in conds)


def _mobius(n):
    f = factorize(n) if n > 1 else []
    return 0 if any(e > 1 for _, e in f) else (-1) ** len(f)


def test_gauss_modulus_equals_sqrt_conductor():
    for q in range(1, 101):
        for c in character_group(q).primitive():
            assert abs(abs(gauss_sum(c)) - math.sqrt(q)) < 1e-9


def test_polya_vinogradov_small_exhaustive():
    for q in range(2, 31):
        for c in character_group(q):
            if c.is_principal:
                continue
            for M in range(q):
                for N in range(1, 3 * q + 1):
                    s, b = polya_vinogradov_check(c, M, N)
                    assert s <= b
    with pytest.raises(InvalidArgument):
        polya_vinogradov_check(character_group(5).principal(), 0, 3)
    assert polya_vinogradov_bound(7) == 6 * math.sqrt(7) * math.log(7)


def test_equality_by_exponents():
    G = character_group(15)
    a, b = G.characters[3], character_group(15).characters[3]
    assert a == b and hash(a) == hash(b)
    assert G.characters[3] != G.characters[4]
    assert G.by_exponents(a.exponents) == a


def test_vectorized_call_matches_scalar():
    chi = character_group(24).characters[5]
    n = np.arange(-30, 60)
    assert np.allclose(chi(n), [chi(int(k)) for k in n])
