from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssc_lab.interval import (
    Interval,
    add_rd,
    add_ru,
    div_rd,
    div_ru,
    hull,
    imax,
    imin,
    isum,
    mul_rd,
    mul_ru,
    two_prod,
    two_sum,
)

mpmath.mp.prec = 200

finite = st.floats(min_value=-1e12, max_value=1e12, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=1e-8, max_value=1e8, allow_nan=False, allow_infinity=False)


def iv(a, b):
    return Interval(min(a, b), max(a, b))


@given(finite, finite)
def test_two_sum_is_exact(a, b):
    s, e = two_sum(a, b)
    assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)


@given(finite, finite)
def test_two_prod_is_exact(a, b):
    p, e = two_prod(a, b)
    if e is not None:
        assert Fraction(p) + Fraction(e) == Fraction(a) * Fraction(b)


@given(finite, finite)
def test_directed_add_and_mul_bracket_exact_value(a, b):
    exact = Fraction(a) + Fraction(b)
    assert Fraction(add_rd(a, b)) <= exact <= Fraction(add_ru(a, b))
    exact = Fraction(a) * Fraction(b)
    assert Fraction(mul_rd(a, b)) <= exact <= Fraction(mul_ru(a, b))


@given(finite, positive)
def test_directed_division(a, b):
    exact = Fraction(a) / Fraction(b)
    assert Fraction(div_rd(a, b)) <= exact <= Fraction(div_ru(a, b))


def test_exact_operations_stay_points():
    assert Interval(1.5, 1.5) + Interval(2.25, 2.25) == Interval(3.75, 3.75)
    assert Interval(3, 3) * Interval(4, 4) == Interval(12, 12)
    assert Interval(9, 9).sqrt() == Interval(3, 3)
    assert Interval(1, 1) / 4 == Interval(0.25, 0.25)


def test_inexact_division_widens():
    third = Interval(1, 1) / 3
    assert third.lo < third.hi
    assert Fraction(third.lo) < Fraction(1, 3) < Fraction(third.hi)


@given(finite, finite, finite, finite)
def test_interval_ops_contain_fraction_results(a, b, c, d):
    x, y = iv(a, b), iv(c, d)
    for u in (Fraction(x.lo), Fraction(x.hi)):
        for v in (Fraction(y.lo), Fraction(y.hi)):
            s = x + y
            assert Fraction(s.lo) <= u + v <= Fraction(s.hi)
            m = x * y
            assert Fraction(m.lo) <= u * v <= Fraction(m.hi)
            diff = x - y
            assert Fraction(diff.lo) <= u - v <= Fraction(diff.hi)


@given(positive, positive)
def test_sqrt_pow_root_exp_log_contain_mpmath(a, b):
    x = iv(a, b)
    for v in (x.lo, x.hi):
        mv = mpmath.mpf(v)
        r = x.sqrt()
        assert r.lo <= mpmath.sqrt(mv) <= r.hi
        for p in (1.5, 2.0, 3.0, 2.7):
            pw = x.pow(p)
            assert pw.lo <= mv ** mpmath.mpf(p) <= pw.hi
            rt = x.root(p)
            assert rt.lo <= mv ** (1 / mpmath.mpf(p)) <= rt.hi
        lg = x.log()
        assert lg.lo <= mpmath.log(mv) <= lg.hi
    small = Interval(-3.0, 2.0)
    e = small.exp()
    assert e.lo <= mpmath.exp(-3) and mpmath.exp(2) <= e.hi


@settings(max_examples=200)
@given(st.lists(finite, min_size=1, max_size=30))
def test_isum_contains_exact_sum(vals):
    total = isum(Interval(v, v) for v in vals)
    exact = sum(Fraction(v) for v in vals)
    assert Fraction(total.lo) <= exact <= Fraction(total.hi)


def test_ipow_matches_fraction_oracle():
    x = Interval(0.7, 0.7)
    got = x.ipow(37)
    assert Fraction(got.lo) <= Fraction(0.7) ** 37 <= Fraction(got.hi)
    assert Interval(0.5, 0.5).ipow(10) == Interval(2.0 ** -10, 2.0 ** -10)


def test_lattice_helpers():
    a, b = Interval(0, 2), Interval(1, 3)
    assert imin(a, b) == Interval(0, 2)
    assert imax(a, b) == Interval(1, 3)
    assert hull(a, Interval(5, 6)) == Interval(0, 6)
    assert imin(Interval(0.5, 4), 1.0) == Interval(0.5, 1.0)


def test_abs_and_neg():
    assert abs(Interval(-2, 1)) == Interval(0, 2)
    assert abs(Interval(-3, -1)) == Interval(1, 3)
    assert -Interval(1, 2) == Interval(-2, -1)


def test_unknown_flag_propagates():
    u = Interval(0, 1, unknown=True)
    assert (u + 1).unknown
    assert (Interval(2, 2) * u).unknown
    assert not (Interval(2, 2) * 3).unknown


def test_rejects_bad_intervals():
    with pytest.raises(ValueError):
        Interval(2, 1)
    with pytest.raises(ValueError):
        Interval(0, float("inf"))
    with pytest.raises(ZeroDivisionError):
        Interval(1, 1) / Interval(-1, 1)
    with pytest.raises(ValueError):
        Interval(-1, 1).sqrt()


def test_negative_zero_normalised():
    assert repr(Interval(-0.0, 0.0)) == "Interval(0.0, 0.0)"
