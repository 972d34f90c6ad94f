import math

import pytest

from ssc_lab.borel import closed_ball, contracting_image, coordinate_zero_set, finite_support_set, whole_space_set
from ssc_lab.errors import PreconditionError
from ssc_lab.interval import Interval
from ssc_lab.sampling import random_point_with_norm, rng_for
from ssc_lab.seqpoint import ZERO_POINT, basis, dist_p, make_point, overwrite, p_norm
from ssc_lab.sscfun import Ball, WholeSpace, const, evaluate, example41_fn, prescribed_discontinuity_fn
from ssc_lab.verify import (
    ApproachSchedule,
    Infeasible,
    NearlyOpenBox,
    NormP,
    Pointwise,
    approach_sample,
    continuity_check,
    determining_demo,
    discontinuity_witness,
    lipschitz_ratio,
    ssc_check,
    ssc_modulus,
    superdensity_falsify,
)

UNIT = Ball(ZERO_POINT, 1.0, 2.0)


def test_schedule_validation():
    with pytest.raises(ValueError):
        ApproachSchedule((0.5, 1.0))
    with pytest.raises(ValueError):
        ApproachSchedule((1.0,), style="sideways")
    s = ApproachSchedule.dyadic(8, 2, 4, 9)
    assert s.radii == (1.0, 0.25, 0.0625, 2 ** -6, 2 ** -8)
    assert ApproachSchedule(**{k: v for k, v in s.to_json().items() if k != "samples_per_radius"}).radii == s.radii
    with pytest.raises(ValueError):
        NormP(0.5)


@pytest.mark.parametrize("style", ["coordinate", "random_direction"])
def test_norm_samples_stay_within_radius(style):
    for j, r in enumerate((1.0, 0.1, 1e-4)):
        for s in range(20):
            x = approach_sample(basis(2, 0.5), 1, r, s, NormP(2.0), style, rng_for(1, j, s))
            assert dist_p(x, basis(2, 0.5), 2.0).hi < r


def test_escape_samples_match_on_a_prefix():
    a = ZERO_POINT
    for s in range(10):
        x = approach_sample(a, 1, 0.01, s, Pointwise(), "pointwise_escape", rng_for(2, s))
        assert x != a


def test_example41_pointwise_fails_with_unit_gap():
    rep = ssc_check(example41_fn(), ZERO_POINT, 1, Pointwise(),
                    ApproachSchedule.dyadic(20, 1, 8, 3, "pointwise_escape"))
    assert rep.verdict.is_false
    assert all(r.sup_gap.lo >= 1 - 1e-12 for r in rep.per_radius[-5:])
    assert rep.witnesses


def test_example41_norm_passes():
    rep = ssc_check(example41_fn(), ZERO_POINT, 1, NormP(2.0), ApproachSchedule.dyadic(40, 4, 32, 4))
    assert rep.verdict.is_true
    assert rep.per_radius[-1].sup_gap.hi < 1e-6


def test_constant_is_continuous_and_ssc():
    for x0 in (ZERO_POINT, basis(4, 3.0)):
        assert continuity_check(const(0.3), x0, NormP(2.0), ApproachSchedule.dyadic(10, 2, 4)).verdict.is_true
        assert ssc_check(const(0.3), x0, 2, NormP(2.0), ApproachSchedule.dyadic(10, 2, 4)).verdict.is_true


def test_empty_schedule_radii_with_no_samples():
    rep = ssc_check(const(1.0), ZERO_POINT, 1, NormP(2.0), ApproachSchedule((1.0, 0.5), 0))
    assert "no samples" in rep.notes


def test_prescribed_function_continuity_pattern():
    f = prescribed_discontinuity_fn(UNIT)
    outside = basis(1, 2.0)
    assert continuity_check(f, outside, NormP(2.0), ApproachSchedule.dyadic(40, 4, 8, 5)).verdict.is_true
    inside = basis(1, 0.3)
    rep = continuity_check(f, inside, NormP(2.0), ApproachSchedule.dyadic(5, 1, 4, 6))
    assert rep.verdict.is_false
    assert ssc_check(f, inside, 2, NormP(2.0), ApproachSchedule.dyadic(40, 4, 8, 7)).verdict.is_true


def test_witness_at_zero():
    f = prescribed_discontinuity_fn(UNIT)
    w = discontinuity_witness(UNIT, 2.0, ZERO_POINT, 0.1)
    assert not isinstance(w, Infeasible)
    assert p_norm(w, 2.0).hi < 0.1
    assert evaluate(f, w).hi < 0.5
    # harmonic-block mass grows without bound in l1 but stays small in l2
    assert len(w.explicit) > 10


@pytest.mark.parametrize("i", range(5))
def test_witness_certified_at_sampled_points(i):
    f = prescribed_discontinuity_fn(UNIT)
    x0 = random_point_with_norm(rng_for(15, i), 0.05, 0.9, 2.0)
    w = discontinuity_witness(UNIT, 2.0, x0, 0.1)
    fx = evaluate(f, x0)
    assert abs(fx - evaluate(f, w)).lo > fx.hi / 2 - 1e-9
    assert dist_p(w, x0, 2.0).hi < 0.1


def test_witness_limitations():
    assert isinstance(discontinuity_witness(Ball(ZERO_POINT, 1.0, 1.0), 1.0, ZERO_POINT, 0.1), Infeasible)
    with pytest.raises(PreconditionError):
        discontinuity_witness(UNIT, 2.0, basis(1, 2.0), 0.1)


def test_ssc_modulus_values():
    assert ssc_modulus(UNIT, 2.0, ZERO_POINT, 1, 0.1) == 0.025
    assert ssc_modulus(UNIT, 2.0, ZERO_POINT, 3, 0.1) == 0.025
    assert ssc_modulus(WholeSpace(), 2.0, ZERO_POINT, 1, 2.0) == pytest.approx(math.log(2.0), rel=1e-15)
    # geometry binds for large eps
    assert ssc_modulus(UNIT, 2.0, basis(1, 0.9), 1, 100.0) == pytest.approx(0.1, abs=1e-12)


def test_lipschitz_ratio_simple_maps():
    assert lipschitz_ratio(lambda x: ZERO_POINT, 200, 2.0, 1) == 0.0
    r = lipschitz_ratio(lambda x: x, 200, 2.0, 1)
    # hi/lo of certified enclosures, so slightly above 1
    assert 0.99 < r < 1.01
    B = closed_ball(ZERO_POINT, 1.0, 2.0)
    assert lipschitz_ratio(lambda x: contracting_image(B, x, 2.0), 500, 2.0, 2) <= 0.5 + 1e-9


def test_superdensity_falsifier_outcomes():
    E = coordinate_zero_set(1)
    box = NearlyOpenBox(ZERO_POINT, {1: (0.5, 1.5)})
    assert superdensity_falsify(E, box, 50, 0).outcome == "emptiness"
    member = superdensity_falsify(finite_support_set(), box, 50, 0)
    assert member.outcome == "member" and box.contains(member.witness)
    assert superdensity_falsify(E, box, 0, 0).outcome == "unknown"


def test_determining_demo():
    E = coordinate_zero_set(1)
    box = NearlyOpenBox(ZERO_POINT, {1: (0.5, 1.5)})
    rep = determining_demo(E, box, 100, 5)
    assert rep.verdict.is_true
    assert evaluate(box.bump(), basis(1)) == Interval(1, 1)
    assert determining_demo(E, box, 0, 5).verdict.is_true
    assert "vacuous" in determining_demo(E, box, 0, 5).notes
    with pytest.raises(PreconditionError):
        determining_demo(whole_space_set(), box, 10, 5)


def test_box_validation_and_centre():
    with pytest.raises(ValueError):
        NearlyOpenBox(ZERO_POINT, {1: (1.0, 1.0)})
    box = NearlyOpenBox(make_point([(2, 3.0)]), {1: (0.5, 1.5)})
    assert box.center() == make_point([(1, 1.0), (2, 3.0)])


def test_modulus_soundness_on_random_balls():
    f = prescribed_discontinuity_fn(UNIT)
    for i in range(50):
        rng = rng_for(33, i)
        x0 = random_point_with_norm(rng, 0.05, 0.9, 2.0)
        k = int(rng.integers(1, 8))
        eps = float(rng.choice([0.05, 0.1, 0.5, 1.0]))
        delta = ssc_modulus(UNIT, 2.0, x0, k, eps)
        for s in range(200):
            style = "coordinate" if s % 2 else "random_direction"
            x = approach_sample(x0, k, delta, s, NormP(2.0), style, rng_for(34, i, s))
            gap = abs(evaluate(f, x) - evaluate(f, overwrite(x, k, x0)))
            assert gap.hi < eps
