from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bratteli.errors import SchemaError
from bratteli.polyrat import (N, Poly, RatFn, eventual_compare, eventual_min,
                              integer_roots, parse_expression, product_value,
                              ratio_test, series_converges, shift)


def test_parse_basic():
    p = parse_expression("n^2 - 2*n + 1")
    assert [p(k) for k in range(4)] == [1, 0, 1, 4]
    assert parse_expression("(n+1)*(n-1)")(5) == 24
    assert parse_expression("3")(100) == 3
    assert parse_expression("2^3")(0) == 8


def test_parse_power_binds_tighter_than_product():
    assert parse_expression("2*n^2")(3) == 18


@pytest.mark.parametrize("bad", ["n n", "2 +", "(n", "x", "n^-1", "n^(2)"])
def test_parse_rejects(bad):
    with pytest.raises(SchemaError):
        parse_expression(bad)


@given(st.lists(st.integers(-9, 9), min_size=1, max_size=5),
       st.lists(st.integers(-9, 9), min_size=1, max_size=5),
       st.integers(-20, 20))
def test_poly_ring_ops(a, b, x):
    pa, pb = Poly(tuple(map(Fraction, a))), Poly(tuple(map(Fraction, b)))
    pa, pb = pa + Poly(), pb + Poly()     # normalize trailing zeros
    assert (pa + pb)(x) == pa(x) + pb(x)
    assert (pa * pb)(x) == pa(x) * pb(x)
    assert (pa - pb)(x) == pa(x) - pb(x)


def test_shift():
    p = parse_expression("n^2")
    assert shift(p)(3) == 16
    assert shift(p, 2)(3) == 25


def test_series_degree_tests():
    one = Poly.const(1)
    assert series_converges(RatFn(one, parse_expression("n^2+1"))) is True
    assert series_converges(RatFn(one, parse_expression("n+1"))) is False
    assert series_converges(RatFn(parse_expression("n"),
                                  parse_expression("n^3+n"))) is True
    assert series_converges(RatFn(Poly())) is True
    # sqrt weight: sum of (1/n^2)^(1/2) diverges, (1/n^4)^(1/2) converges
    assert series_converges(RatFn(one, parse_expression("n^2")),
                            power=Fraction(1, 2)) is False
    assert series_converges(RatFn(one, parse_expression("n^4")),
                            power=Fraction(1, 2)) is True


def test_ratio_test():
    half = RatFn.const(Fraction(1, 2))
    assert ratio_test(half) is True
    assert ratio_test(RatFn.const(2)) is False
    # Raabe: term n^-2 has ratio n^2/(n+1)^2, limit 1, Raabe limit 2
    r = RatFn(parse_expression("n^2"), parse_expression("(n+1)^2"))
    assert ratio_test(r) is True
    # harmonic: ratio n/(n+1), Raabe limit 1: undecided
    assert ratio_test(RatFn(N, N + Poly.const(1))) is None


def test_eventual_comparisons():
    f = RatFn(N, parse_expression("n^2"))          # ~ 1/n
    g = RatFn(Poly.const(1), parse_expression("n^2"))
    assert eventual_compare(f, g) > 0
    assert eventual_min([f, g]) is g


def test_integer_roots():
    lead, roots = integer_roots(parse_expression("n^2-1"))
    assert lead == 1 and roots == [-1, 1]
    lead, roots = integer_roots(parse_expression("2*n^2-2"))
    assert lead == 2 and roots == [-1, 1]
    assert integer_roots(parse_expression("n^2+1")) is None
    assert integer_roots(parse_expression("n^2-2")) is None


def test_product_value_matches_direct():
    f = RatFn(N - Poly.const(1), N + Poly.const(1))
    direct = Fraction(1)
    for i in range(4, 41):
        direct *= f(i)
    assert product_value(f, 4, 40) == direct
    assert product_value(f, 1, 99) == 0      # zero factor at i = 1
    assert product_value(f, 7, 6) == 1       # empty product
    # unfactorable denominator: no closed form
    g = RatFn(parse_expression("n^2-1"), parse_expression("n^2+1"))
    assert product_value(g, 2, 10) is None


def test_product_value_huge_range_is_fast():
    f = RatFn(N - Poly.const(1), N + Poly.const(1))
    value = product_value(f, 2, 10 ** 9)
    assert value == Fraction(2, 10 ** 9 * (10 ** 9 + 1))
