import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from firstreturn.compositions import (
    BRUTE_FORCE_MAX_N,
    brute_force_irreducible,
    irreducible_counts1,
    irreducible_counts2,
    irreducible_probability,
    total_pairs1,
    total_pairs2,
)
from firstreturn.errors import DomainError, ResourceError

# Known start of the sequence: 1, 1, 3, 9, 29, 97, 333, 1165, ...
KNOWN_F = [1, 1, 3, 9, 29, 97, 333, 1165, 4135, 14845]


@pytest.mark.parametrize("n,k,expected", [(3, 2, 4), (1, 1, 1), (5, 3, 36)])
def test_total_pairs2(n, k, expected):
    assert total_pairs2(n, k) == expected


@pytest.mark.parametrize("n,expected", [(1, 1), (3, 6), (5, 70)])
def test_total_pairs1(n, expected):
    assert total_pairs1(n) == expected


@pytest.mark.parametrize("n,k", [(3, 4), (3, 0), (0, 0)])
def test_total_pairs2_domain(n, k):
    with pytest.raises(DomainError):
        total_pairs2(n, k)


def test_total_pairs1_domain():
    with pytest.raises(DomainError):
        total_pairs1(0)


@given(st.integers(1, 60))
def test_totals_row_sum(n):
    assert sum(total_pairs2(n, k) for k in range(1, n + 1)) == total_pairs1(n)


def test_known_prefix():
    t = irreducible_counts1(len(KNOWN_F))
    assert list(t.f1[1:]) == KNOWN_F


def test_two_var_examples():
    t = irreducible_counts2(4)
    assert t.f2[(3, 2)] == 2
    assert t.f2[(4, 2)] == 6 and t.f2[(4, 3)] == 2
    assert all(t.f2[(n, 1)] == 1 for n in range(1, 5))
    assert all(t.f2[(n, n)] == 0 for n in range(2, 5))


def test_two_var_renewal_identity():
    n_max = 15
    t = irreducible_counts2(n_max)
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            conv = sum(
                t.f2[(m, j)] * total_pairs2(n - m, k - j)
                for m in range(1, n)
                for j in range(1, min(m, k - 1) + 1)
                if k - j <= n - m
            )
            assert total_pairs2(n, k) == t.f2[(n, k)] + conv


def test_column_sums_match_one_var():
    t2 = irreducible_counts2(30)
    t1 = irreducible_counts1(30)
    for n in range(1, 31):
        assert sum(t2.f2[(n, k)] for k in range(1, n + 1)) == t1.f1[n]
    assert t2.f1 == t1.f1


def test_partial_k_table_leaves_f1_empty():
    t = irreducible_counts2(6, 3)
    assert t.k_max == 3
    assert (6, 4) not in t.f2


@pytest.mark.parametrize("n", range(1, 11))
def test_brute_force_matches_renewal(n):
    f, row = brute_force_irreducible(n)
    t = irreducible_counts2(n)
    assert f == t.f1[n]
    assert row == {k: t.f2[(n, k)] for k in range(1, n + 1)}


def test_brute_force_examples():
    assert brute_force_irreducible(1) == (1, {1: 1})
    assert brute_force_irreducible(3) == (3, {1: 1, 2: 2, 3: 0})
    assert brute_force_irreducible(4)[0] == 9


def test_brute_force_refuses_large():
    with pytest.raises(ResourceError):
        brute_force_irreducible(BRUTE_FORCE_MAX_N + 1)


def test_probability():
    t = irreducible_counts1(5)
    assert irreducible_probability(t, 3) == Fraction(1, 2)
    assert irreducible_probability(t, 1) == 1
    with pytest.raises(DomainError):
        irreducible_probability(t, 6)


def test_table_invariants_hold():
    assert irreducible_counts2(20).verify() == []
    assert irreducible_counts1(100).verify() == []


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 120))
def test_f_bounded_by_totals(n):
    t = irreducible_counts1(n)
    assert 0 < t.f1[n] <= t.totals1[n] < 4 ** max(n - 1, 1)
    assert t.p_exact[n] == Fraction(t.f1[n], t.totals1[n])


def test_table_is_immutable():
    t = irreducible_counts2(3)
    with pytest.raises(TypeError):
        t.f2[(1, 1)] = 5
    with pytest.raises(AttributeError):
        t.n_max = 4


def test_growth_rough_magnitude():
    # f(n) 4^{-n} n^{3/2} should be of order one already at moderate n
    t = irreducible_counts1(400)
    v = 400**1.5 * float(Fraction(t.f1[400], 4**400))
    assert 0.9 < v < 1.3
    assert math.isclose(float(t.p_exact[400]) * 400, 8, rel_tol=0.2)
