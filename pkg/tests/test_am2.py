import math

import pytest
import sympy

from sievelab import am2
from sievelab.arithmetic import build_tables
from sievelab.errors import InvalidArgument
from sievelab.progressions import psi_progression

T = build_tables(300_001)


def test_census_examples():
    c = am2.census(T, 50, 1.0)
    assert c.count == sympy.primepi(50)
    for theta in (0.01, 0.3, 5 / 9, 1):
        assert 101 in [p for p, _, _ in am2.census(T, 200, theta).rows]
    assert am2.census(T, 10, 0.5).rows[0] == (2, 1, 1)


def test_census_rows_reconstruct():
    for p, s, m in am2.census(T, 300_000, 5 / 9).rows:
        assert s * m * m + 1 == p and sympy.isprime(p)
        assert s == math.prod(q for q, e in sympy.factorint(p - 1).items() if e % 2)


def test_census_monotone():
    thetas = [0.2, 0.4, 5 / 9, 0.7, 1.0]
    for x in (1000, 50_000):
        counts = [am2.census(T, x, th).count for th in thetas]
        assert counts == sorted(counts)
    counts = [am2.census(T, x, 5 / 9).count for x in (10, 1000, 10_000, 300_000)]
    assert counts == sorted(counts)
    with pytest.raises(InvalidArgument):
        am2.census(T, 100, 0)


def test_census_csv():
    text = am2.census(T, 100, 0.5).to_csv()
    assert text.startswith("p,s,m\r\n2,1,1\r\n")
    s = am2.census(T, 10_000, 5 / 9).summary()
    assert s["normalized"] == s["count"] / 10_000 ** (7 / 9)


@pytest.mark.parametrize("x, y", [(1000, 2), (10_000, 5), (100_000, 10), (100_000, 21), (50_000, 300)])
def test_weighted_sum_two_loop_orders_agree(x, y):
    q_major = math.fsum(am2.weighted_terms_q_major(T, x, y).tolist())
    n_major = math.fsum(am2.weighted_terms_n_major(T, x, y).tolist())
    assert q_major == n_major == am2.weighted_sum(T, x, y).lhs


@pytest.mark.parametrize("x, y", [(10_000, 5), (100_000, 21)])
def test_weighted_sum_psi_difference(x, y):
    lhs = am2.weighted_sum(T, x, y).lhs
    via_psi = math.fsum(
        psi_progression(T, 2 * x + 1, q * q, 1) - psi_progression(T, x + 1, q * q, 1)
        for q in range(y + 1, 2 * y + 1))
    assert math.isclose(lhs, via_psi, rel_tol=1e-12)


def test_weighted_sum_degenerate_regime():
    r = am2.weighted_sum(T, 1000, 100)
    assert r.lhs >= 0 and r.main > 0 and set(r.to_record()) == {"x", "y", "lhs", "main", "ratio"}


def test_sparsity_examples():
    for x in (1, 2, 99, 100, 10_000, 12_345):
        assert am2.sparsity_count(x, 0) == math.isqrt(x)
    assert am2.sparsity_count(100, 1) == 100
    assert am2.sparsity_count(100_000, 5 / 9) == am2.sparsity_scan(T, 100_000, 5 / 9)


@pytest.mark.parametrize("theta", [0.1, 0.5, 0.75, 0.99])
def test_sparsity_parameterization_matches_scan(theta):
    assert am2.sparsity_count(300_000, theta) == am2.sparsity_scan(T, 300_000, theta)


def test_guard_band_on_exact_powers():
    # s(8) = 2 = 8^(1/3) sits exactly on the boundary and must count, next to 1 and 4
    assert am2.sparsity_scan(build_tables(100), 8, 1 / 3) == 3
    assert am2.sparsity_count(8, 1 / 3) == 3
