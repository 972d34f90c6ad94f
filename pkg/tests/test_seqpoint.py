import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssc_lab.borel import DYADIC
from ssc_lab.errors import Unrepresentable
from ssc_lab.interval import Interval
from ssc_lab.sampling import random_point, rng_for
from ssc_lab.seqpoint import (
    ZERO_POINT,
    Geometric,
    Masked,
    PowerLaw,
    SigmaOrder,
    basis,
    coord,
    dist_p,
    dist_trunc,
    dumps_point,
    dyadic_from_flat,
    dyadic_to_flat,
    l1_sum,
    loads_point,
    make_point,
    overwrite,
    p_norm,
    project,
    scaled,
    set_coord,
    sigma_order,
)

mpmath.mp.dps = 40


def test_make_point_encodes_and_canonicalises():
    x = make_point([(1, 3.0), (2, 4.0)])
    assert [coord(x, n) for n in range(1, 5)] == [3.0, 4.0, 0.0, 0.0]
    assert make_point([(1, 0.0)]) == ZERO_POINT
    assert make_point([(1, 0.0)]).explicit == ()
    g = make_point([], Geometric(1.0, 0.5, 1))
    assert [coord(g, n) for n in range(1, 5)] == [1.0, 0.5, 0.25, 0.125]


def test_explicit_entries_matching_the_tail_are_absorbed():
    g = make_point([], Geometric(1.0, 0.5, 1))
    h = make_point([(1, 1.0), (2, 0.5)], Geometric(0.25, 0.5, 3))
    assert g == h
    assert hash(g) == hash(h)


def test_make_point_rejects_bad_input():
    with pytest.raises(ValueError):
        make_point([(0, 1.0)])
    with pytest.raises(ValueError):
        make_point([(1, math.nan)])
    with pytest.raises(ValueError):
        make_point([(1, 1.0), (1, 2.0)])


def test_coord_examples():
    assert coord(make_point([(1, 3.0), (2, 4.0)]), 2) == 4.0
    assert coord(make_point([], Geometric(1.0, 0.5, 1)), 3) == 0.25
    assert coord(make_point([(1, 3.0)]), 10 ** 9) == 0.0


def test_overwrite_examples():
    x = make_point([(1, 1.0), (2, 2.0), (3, 3.0)])
    assert overwrite(x, 2, ZERO_POINT) == make_point([(1, 1.0), (3, 3.0)])
    for n in range(2, 12):
        xn = make_point([(1, 1.0 / n), (n, float(n))])
        assert overwrite(xn, 1, ZERO_POINT) == make_point([(n, float(n))])
    assert overwrite(x, 2, x) == x


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 40))
def test_overwrite_algebra(seed, t):
    rng = rng_for(seed)
    x, a, b = random_point(rng), random_point(rng), random_point(rng)
    y = overwrite(x, t, a)
    assert coord(y, t) == coord(a, t)
    for n in range(1, 45):
        if n != t:
            assert coord(y, n) == coord(x, n)
    assert overwrite(y, t, a) == y
    twice = overwrite(overwrite(x, t, b), t, a)
    back = overwrite(y, t, x)
    for n in range(1, 45):
        assert coord(twice, n) == coord(y, n)
        assert coord(back, n) == coord(x, n)
    if _exact_tail(x):
        # materialised tail values are exact doubles, so the forms agree too
        assert twice == y
        assert back == x


def _dyadic(r):
    f = Fraction(r)
    return abs(f.numerator) == 1 and f.denominator & (f.denominator - 1) == 0


def _exact_tail(x):
    t = x.tail
    if isinstance(t, Masked):
        t = t.inner
    return t.is_zero or (isinstance(t, Geometric) and _dyadic(t.r))


def test_overwrite_restores_adjacent_tail_value_exactly():
    x = make_point([(1, 2.0)], Geometric(1.3, 0.6, 4))
    y = overwrite(x, 4, ZERO_POINT)
    assert y.tail.start == 5
    assert overwrite(y, 4, x) == x


def test_sigma_order_examples():
    xn = make_point([(1, 0.25), (4, 4.0)])
    assert sigma_order(xn, ZERO_POINT) == SigmaOrder(2)
    g = make_point([], Geometric(1.0, 0.5, 1))
    assert sigma_order(g, ZERO_POINT) == SigmaOrder(None)
    assert sigma_order(g, g) == SigmaOrder(0)
    assert sigma_order(set_coord(g, 3, 7.0), g) == SigmaOrder(1)


def test_dyadic_partition_round_trip():
    for k in range(1, 5000):
        n, m = dyadic_from_flat(k)
        assert dyadic_to_flat(n, m) == k
    assert dyadic_from_flat(1) == (1, 1)
    assert dyadic_from_flat(6) == (2, 2)
    assert dyadic_to_flat(3, 2) == 12


def test_projection_of_finite_and_masked_points():
    x = make_point([(1, 1.0), (2, 2.0), (6, 6.0), (12, 3.0)])
    p2 = project(x, 2, DYADIC)
    assert p2 == make_point([(1, 2.0), (2, 6.0)])
    assert project(x, 3, DYADIC) == make_point([(2, 3.0)])
    m = make_point([], Masked(Geometric(1.0, 0.5, 1), 2))
    assert isinstance(project(m, 2, DYADIC).tail, Geometric)
    assert project(m, 3, DYADIC) == ZERO_POINT


def test_projection_surrogate_matches_direct_positions():
    g = make_point([], Geometric(1.0, 0.5, 1))
    pr = project(g, 1, DYADIC)
    for m in range(1, 101):
        want = Fraction(1, 2) ** (dyadic_to_flat(1, m) - 1)
        v = coord(pr, m)
        assert Fraction(v) == want or v == float(want)
    assert sigma_order(pr, ZERO_POINT) == SigmaOrder(None)


def test_norm_examples():
    assert p_norm(basis(1), 2, 1) == Interval(1.0, 1.0)
    assert p_norm(make_point([(1, 3.0), (2, 4.0)]), 2, 2) == Interval(5.0, 5.0)
    g = make_point([], Geometric(1.0, 0.5, 1))
    nrm = p_norm(g, 2, 64)
    assert nrm.width < 1e-12
    exact = mpmath.sqrt(mpmath.mpf(4) / 3)
    assert nrm.lo <= exact <= nrm.hi
    partial = mpmath.sqrt(mpmath.fsum(mpmath.mpf(4) ** -(n - 1) for n in range(1, 10 ** 4 + 1)))
    assert abs(partial - exact) < 1e-30
    assert dist_p(g, ZERO_POINT, 2, 64) == nrm


def test_distance_examples():
    d = dist_p(basis(1), basis(2), 2, 2)
    assert d.lo <= math.sqrt(2) <= d.hi and d.width <= 1e-15
    assert dist_trunc(basis(1, 3.0), ZERO_POINT, 2) == Interval(1.0, 1.0)
    assert dist_trunc(basis(1, 0.5), ZERO_POINT, 2) == Interval(0.5, 0.5)
    for x in (make_point([(2, 1.5)]), make_point([], PowerLaw(1.0, 2.0, 1))):
        assert dist_p(x, x, 2).lo == 0.0
        assert dist_p(x, x, 2).hi < 1e-12


@pytest.mark.parametrize("s,start,p", [(2.0, 1, 2.0), (1.2, 1, 2.0), (1.7, 4, 3.0), (3.0, 2, 1.0)])
def test_powerlaw_norm_contains_zeta(s, start, p):
    x = make_point([], PowerLaw(1.0, s, start))
    want = mpmath.zeta(p * s, start) ** (1 / mpmath.mpf(p))
    for depth in (1, 8, 64, 200):
        got = p_norm(x, p, depth)
        assert got.lo <= want <= got.hi


def _exact_dist(x, y, p, terms=3000):
    # geometric tails with |r| <= 3/4 leave < 1e-300 after a few thousand terms
    xs = [mpmath.mpf(coord(x, n)) for n in range(1, terms)]
    ys = [mpmath.mpf(coord(y, n)) for n in range(1, terms)]
    return mpmath.fsum(abs(a - b) ** p for a, b in zip(xs, ys)) ** (1 / mpmath.mpf(p))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([1.0, 2.0, 3.0]))
def test_distance_contains_high_precision_sum(seed, p):
    rng = rng_for(seed, 1)
    x = random_point(rng, ("finite", "geometric"))
    y = random_point(rng, ("finite", "geometric"))
    d = dist_p(x, y, p, 64)
    assert d.lo <= _exact_dist(x, y, p) <= d.hi


def _triples(n):
    for i in range(n):
        rng = rng_for(2024, i)
        yield random_point(rng), random_point(rng), random_point(rng)


def test_metric_axioms_on_random_triples():
    for x, y, z in _triples(1000):
        dxy, dyx = dist_trunc(x, y, 2), dist_trunc(y, x, 2)
        dxz, dyz = dist_trunc(x, z, 2), dist_trunc(y, z, 2)
        assert dxy.lo >= 0.0
        assert dxy.lo <= dyx.hi and dyx.lo <= dxy.hi
        assert dxz.lo <= dxy.hi + dyz.hi + 1e-15
        assert dist_trunc(x, x, 2).lo == 0.0


def test_enclosures_nest_in_depth():
    depths = (1, 4, 8, 64, 200, 600)
    for i in range(200):
        rng = rng_for(77, i)
        x, y = random_point(rng), random_point(rng)
        encs = [dist_p(x, y, 2, d) for d in depths]
        for a, b in zip(encs, encs[1:]):
            assert b.within(a), (x, y, a, b)


def test_scaled_and_l1_sum():
    x = make_point([(1, 1.0), (3, -2.0)])
    assert scaled(x, 2.0) == make_point([(1, 2.0), (3, -4.0)])
    assert l1_sum(x) == Interval(3.0, 3.0)
    with pytest.raises(Unrepresentable):
        l1_sum(make_point([], Geometric(1.0, 0.5, 1)))


def test_json_round_trip():
    pts = [
        ZERO_POINT,
        make_point([(1, 0.1), (7, -3.5)]),
        make_point([(1, 2.0)], Geometric(1.3, -0.6, 4)),
        make_point([], PowerLaw(0.7, 2.2, 3)),
        make_point([(1, 0.5)], Masked(Geometric(1.0, 0.25, 2), 2)),
        project(make_point([], Geometric(1.0, 0.5, 1)), 1, DYADIC),
    ]
    for x in pts:
        y = loads_point(dumps_point(x))
        assert y == x
        assert dumps_point(y) == dumps_point(x)
        assert [coord(y, n) for n in range(1, 30)] == [coord(x, n) for n in range(1, 30)]


def test_random_geometric_coordinates_match_formula():
    rng = np.random.default_rng(5)
    for _ in range(50):
        c, r, start = float(rng.uniform(1, 2)), float(rng.uniform(0.5, 0.75)), int(rng.integers(1, 6))
        x = make_point([], Geometric(c, r, start))
        for n in range(start, start + 20):
            assert coord(x, n) == pytest.approx(c * r ** (n - start), rel=1e-14)
        assert coord(x, start - 1) == 0.0 if start > 1 else True
