"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line
with its wall time, whether or not output capture is on."""
import contextlib
import filecmp
import os
import time

import pytest

from ssc_lab import cli
from ssc_lab.borel import (
    ClassIndex,
    baire2_indicator_A1,
    baire2_iterated_limit,
    class_is_s_open_check,
    class_membership,
    closed_ball,
    contracting_image,
    coordinate_zero_set,
    fixed_point,
)
from ssc_lab.interval import Interval
from ssc_lab.sampling import (
    random_finite_point,
    random_geometric_point,
    random_point,
    random_point_with_norm,
    rng_for,
)
from ssc_lab.seqpoint import ZERO_POINT, basis, dist_p, dist_trunc, p_norm
from ssc_lab.sscfun import (
    Ball,
    add,
    chi_class,
    const,
    evaluate,
    example41_fn,
    example_x,
    example_y,
    fabs,
    fmax,
    fmin,
    geometric_series,
    mul,
    prescribed_discontinuity_fn,
    product_bump_fn,
    sub,
)
from ssc_lab.verify import (
    ApproachSchedule,
    Infeasible,
    NearlyOpenBox,
    NormP,
    Pointwise,
    continuity_check,
    determining_demo,
    discontinuity_witness,
    lipschitz_ratio,
    ssc_check,
    ssc_modulus,
    superdensity_falsify,
)

SEED = 0xC0FFEE
UNIT = Ball(ZERO_POINT, 1.0, 2.0)


@contextlib.contextmanager
def criterion(capsys, label, limit=None):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        if limit is not None and dt >= limit:
            ok = False
        budget = f" (limit {limit:g} s)" if limit is not None else ""
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}: {dt:.2f} s{budget}")
    if limit is not None:
        assert dt < limit, f"{label} took {dt:.2f} s"


def test_c1_example41(capsys):
    with criterion(capsys, "C1 distance-quotient example", 5):
        f = example41_fn()
        for n in range(2, 101):
            assert evaluate(f, example_x(n)) == Interval(0, 0)
            assert evaluate(f, example_y(n)) == Interval(1, 1)
        escape = ApproachSchedule.dyadic(20, 1, 8, 1, "pointwise_escape")
        rep = ssc_check(f, ZERO_POINT, 1, Pointwise(), escape)
        assert rep.verdict.is_false
        assert min(r.sup_gap.lo for r in rep.per_radius[-5:]) >= 1 - 1e-12
        rep = ssc_check(f, ZERO_POINT, 1, NormP(2.0), ApproachSchedule.dyadic(40, 4, 32, 2), tol=1e-6)
        assert rep.verdict.is_true


def test_c2_prescribed_discontinuities(capsys):
    with criterion(capsys, "C2 prescribed discontinuity set", 30):
        f = prescribed_discontinuity_fn(UNIT)
        sched = ApproachSchedule.dyadic(40, 4, 16, 3)
        for i in range(20):
            x = random_point_with_norm(rng_for(SEED, 2, 0, i), 1.1, 3.0, 2.0)
            assert continuity_check(f, x, NormP(2.0), sched, tol=1e-6).verdict.is_true
        for i in range(20):
            x0 = random_point_with_norm(rng_for(SEED, 2, 1, i), 0.05, 0.9, 2.0)
            w = discontinuity_witness(UNIT, 2.0, x0, 0.1)
            assert not isinstance(w, Infeasible)
            fx = evaluate(f, x0)
            assert abs(fx - evaluate(f, w)).lo > fx.hi / 2 - 1e-9
            assert dist_p(w, x0, 2.0).hi < 0.1
        for i in range(20):
            a = random_point_with_norm(rng_for(SEED, 2, 2, i), 0.05, 3.0, 2.0)
            for k in range(1, 6):
                assert ssc_check(f, a, k, NormP(2.0), sched, tol=1e-6).verdict.is_true
        for k in range(1, 6):
            assert ssc_modulus(UNIT, 2.0, ZERO_POINT, k, 0.1) == 0.025
        # the l1 ball admits no witness from this construction
        assert isinstance(discontinuity_witness(Ball(ZERO_POINT, 1.0, 1.0), 1.0, ZERO_POINT, 0.1), Infeasible)


def test_c3_contraction(capsys):
    with criterion(capsys, "C3 contracting map and fixed point", 10):
        B = closed_ball(ZERO_POINT, 1.0, 2.0)
        f = lambda x: contracting_image(B, x, 2.0)  # noqa: E731
        assert lipschitz_ratio(f, 10_000, 2.0, SEED) <= 0.5 + 1e-9
        trace = []
        x, res = fixed_point(f, basis(1, 2.0), 2.0, 1e-10, 60, trace=trace)
        assert res.hi < 1e-10 and len(trace) - 1 <= 60
        assert dist_trunc(x, ZERO_POINT, 2.0).hi < 1e-10
        A1 = ClassIndex(1, "A")
        for i in range(100):
            rng = rng_for(SEED, 3, i)
            lo, hi = (1e-3, 0.9) if i % 2 else (1.1, 3.0)
            x = random_point_with_norm(rng, lo, hi, 2.0)
            inside = B.membership(x)
            image = class_membership(f(x), A1)
            assert inside.decided and image.decided
            assert inside.value is image.value


def test_c4_parity_and_s_open(capsys):
    with criterion(capsys, "C4 Borel parity and S-openness", 5):
        pattern = {1: True, 2: False, 3: True}
        for i in range(100):
            x = random_finite_point(rng_for(SEED, 4, 0, i))
            g = random_geometric_point(rng_for(SEED, 4, 1, i))
            for alpha, want in pattern.items():
                assert class_membership(x, ClassIndex(alpha, "A")).value is want
                assert class_membership(g, ClassIndex(alpha, "A")).value is (not want)
        for alpha in (1, 2, 3):
            assert class_is_s_open_check(ClassIndex(alpha, "A"), 100, seed=SEED + alpha).verdict.is_true


def test_c5_baire2(capsys):
    with criterion(capsys, "C5 iterated limits of continuous indicators", 2):
        for i in range(50):
            rng = rng_for(SEED, 5, i)
            x = random_finite_point(rng) if i % 2 else random_geometric_point(rng)
            chi = float(class_membership(x, ClassIndex(1, "A")).value)
            lim, _ = baire2_iterated_limit(x)
            assert lim == chi
            m = (x.support_max if x.tail.is_zero else x.tail.start) + 3
            assert baire2_indicator_A1(x, m, 2 ** m + 1) == chi


def _leaf(rng):
    k = int(rng.integers(0, 6))
    if k == 0:
        return const(float(rng.uniform(-2, 2)))
    if k == 1:
        c = random_point_with_norm(rng, 0.0, 0.5, 2.0)
        return prescribed_discontinuity_fn(Ball(c, float(rng.uniform(0.5, 2)), 2.0))
    if k == 2:
        return example41_fn()
    if k == 3:
        n = int(rng.integers(1, 4))
        return product_bump_fn([(n, float(rng.uniform(-1, 1)), float(rng.uniform(0.5, 2)))])
    if k == 4:
        return chi_class(ClassIndex(int(rng.integers(1, 4)), "AB"[int(rng.integers(0, 2))]))
    return geometric_series(prescribed_discontinuity_fn(UNIT), 1.0, 0.5, 1.0)


def random_tree(rng, depth=3):
    if depth == 0 or rng.random() < 0.3:
        return _leaf(rng)
    op = int(rng.integers(0, 6))
    if op == 5:
        return fabs(random_tree(rng, depth - 1))
    return (add, sub, mul, fmin, fmax)[op](random_tree(rng, depth - 1), random_tree(rng, depth - 1))


def test_c6_closure_under_combinators(capsys):
    with criterion(capsys, "C6 random combinator trees stay ssc", 60):
        for i in range(50):
            rng = rng_for(SEED, 6, i)
            f = random_tree(rng)
            a = random_point(rng, ("finite", "geometric"))
            t = int(rng.integers(1, 7))
            rep = ssc_check(f, a, t, NormP(2.0), ApproachSchedule.dyadic(40, 4, 16, i), tol=1e-6)
            assert rep.verdict.is_true, (i, rep.notes)


def test_c7_determining_sets(capsys):
    with criterion(capsys, "C7 super-dense falsifier and determining demo", 2):
        E = coordinate_zero_set(1)
        box = NearlyOpenBox(ZERO_POINT, {1: (0.5, 1.5)})
        assert superdensity_falsify(E, box, 100, SEED).outcome == "emptiness"
        assert evaluate(box.bump(), basis(1)) == Interval(1, 1)
        assert determining_demo(E, box, 100, SEED).verdict.is_true


DEPTHS = (1, 8, 64, 512)


def _depth_ops(rng):
    x, y = random_point(rng), random_point(rng)
    p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
    f = random_tree(rng)
    ball = closed_ball(random_point(rng, ("finite",)), float(rng.uniform(0.5, 3)), p)
    return {
        "p_norm": lambda d: p_norm(x, p, d),
        "dist_p": lambda d: dist_p(x, y, p, d),
        "dist_trunc": lambda d: dist_trunc(x, y, p, d),
        "eval": lambda d: f.eval(x, d),
        "ball_distance": lambda d: ball.distance(x, p, d),
    }


def _run_demos(where):
    old = os.getcwd()
    os.chdir(where)
    try:
        return [cli.demo(name) for name in cli.list_demos()]
    finally:
        os.chdir(old)


def test_c8_infrastructure(capsys, tmp_path):
    with criterion(capsys, "C8 depth nesting and reproducible reports"):
        for i in range(1000):
            for name, op in _depth_ops(rng_for(SEED, 8, i)).items():
                encs = [op(d) for d in DEPTHS]
                for a, b in zip(encs, encs[1:]):
                    assert b.within(a), (name, i, a, b)
        first, second = tmp_path / "a", tmp_path / "b"
        first.mkdir()
        second.mkdir()
        assert _run_demos(first) == [0] * len(cli.list_demos())
        assert _run_demos(second) == [0] * len(cli.list_demos())
        out_a, out_b = first / "ssc-lab-out", second / "ssc-lab-out"
        names = sorted(os.listdir(out_a))
        assert names == sorted(os.listdir(out_b)) and names
        match, mismatch, errors = filecmp.cmpfiles(out_a, out_b, names, shallow=False)
        assert not mismatch and not errors


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
