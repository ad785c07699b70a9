import random

import pytest
import sympy as sp

from pstab.errors import DomainError, IntegralityError, PreconditionError
from pstab.numerics import (
    K,
    IntBox,
    IntPoly,
    binomial,
    box_search_empty,
    ceil_div,
    integer_partitions,
    partition_count,
    partitions_brute_force,
    poly_derivative_discrete,
)

X, Y = sp.Symbol("x"), sp.Symbol("y")


@pytest.mark.parametrize("n,k,expected", [(5, 2, 10), (4, 0, 1), (2, 5, 0), (-1, 0, 0), (3, -1, 0)])
def test_binomial(n, k, expected):
    assert binomial(n, k) == expected


@pytest.mark.parametrize("d,r,expected", [(3, 2, 2), (4, 2, 2), (-3, 2, -1), (0, 5, 0), (-1, 3, 0)])
def test_ceil_div(d, r, expected):
    assert ceil_div(d, r) == expected


def test_ceil_div_rejects_nonpositive_divisor():
    with pytest.raises(DomainError):
        ceil_div(1, 0)


def test_partition_count_small_values():
    assert [partition_count(r) for r in range(8)] == [1, 1, 2, 3, 5, 7, 11, 15]
    assert partition_count(30) == 5604


def test_partition_count_matches_enumeration():
    for r in range(0, 16):
        assert partition_count(r) == partitions_brute_force(r)


def test_integer_partitions_order():
    assert integer_partitions(4) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert integer_partitions(0) == [()]
    with pytest.raises(DomainError):
        integer_partitions(-1)


def test_intpoly_evaluation_and_shift():
    p = IntPoly.from_expr(K**2 + 7 * K)
    assert p(2) == 18
    assert p.degree == 2
    assert p.shift(1) == IntPoly.from_expr(K**2 + 9 * K + 8)


def test_intpoly_integer_valued_with_rational_coefficients():
    p = IntPoly.from_expr(K * (K + 1) / 2)
    assert p(3) == 6
    with pytest.raises(IntegralityError):
        IntPoly.from_expr(K / 2)(1)


def test_intpoly_from_values_interpolates():
    assert IntPoly.from_values([(0, 0), (1, 1), (2, 4)]) == IntPoly.from_expr(K**2)


def test_discrete_derivative():
    assert poly_derivative_discrete(IntPoly.from_expr(K**2)) == IntPoly.from_expr(2 * K - 1)


def test_box_search_finds_smallest_witness():
    box = IntBox.of({"x": (-5, 5), "y": (-5, 5)})
    result = box_search_empty([sp.Gt(X + Y, 8)], box)
    assert not result.empty
    assert result.witness == {"x": 4, "y": 5}


def test_box_search_empty_box():
    box = IntBox.of({"x": (-5, 5), "y": (-5, 5)})
    result = box_search_empty([sp.Gt(X + Y, 20), sp.Ge(X, 0)], box)
    assert result.empty
    assert result.witness is None
    assert result.points_checked == 121


def test_box_search_preconditions():
    box = IntBox.of({"x": (0, 3)})
    with pytest.raises(PreconditionError):
        box_search_empty([], box)
    with pytest.raises(PreconditionError):
        box_search_empty([sp.Gt(X + Y, 0)], box)


def test_inverted_box_is_rejected():
    with pytest.raises(DomainError):
        IntBox.of({"x": (3, 0)})


def test_pascal_rule():
    for n in range(1, 65):
        for k in range(0, n + 1):
            assert binomial(n, k) == binomial(n - 1, k - 1) + binomial(n - 1, k)


def test_ceil_div_is_the_unique_ceiling():
    for r in range(1, 13):
        for d in range(-60, 61):
            q = ceil_div(d, r)
            assert r * (q - 1) < d <= r * q


def test_discrete_derivative_recovers_differences():
    rng = random.Random(3)
    for _ in range(50):
        p = IntPoly(tuple(rng.randint(-20, 20) for _ in range(rng.randint(0, 5))))
        dp = poly_derivative_discrete(p)
        for k in range(-100, 101, 7):
            assert dp(k) + p(k - 1) == p(k)


def test_integer_valued_detection():
    assert IntPoly.from_expr(K * (K + 1) / 2).is_integer_valued()
    assert IntPoly.from_expr(K * (K - 1) * (K - 2) / 6 + 4).is_integer_valued()
    assert IntPoly().is_integer_valued()
    assert not IntPoly.from_expr(K / 2).is_integer_valued()
    assert not IntPoly.from_expr(K**2 / 2 + 1).is_integer_valued()


def test_partition_reference_count():
    assert [partitions_brute_force(r) for r in range(8)] == [1, 1, 2, 3, 5, 7, 11, 15]
    assert partitions_brute_force(30) == 5604
    with pytest.raises(DomainError):
        partitions_brute_force(-1)
