"""Numerical verification harness.

Limits are not decidable, so checkers return three-valued verdicts.  Along
a decreasing list of radii they sample points approaching the target and
record certified gap intervals.  The verdict is True when the supremum gap
is certifiably below ``tol`` at each of the last five radii, False when
each of those radii carries a sample whose gap is certifiably above
``tol``, and Unknown otherwise.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .borel import SetOracle
from .errors import PreconditionError, SSCLabError
from .interval import Interval, next_down
from .outcome import CheckReport, RadiusRecord, Verdict
from .sampling import random_point, rng_for, small_geometric_tail
from .seqpoint import (
    DEFAULT_DEPTH,
    Geometric,
    Masked,
    PowerLaw,
    SeqPoint,
    coord,
    dist_p,
    dist_trunc,
    make_point,
    overwrite,
    p_norm,
    scaled,
    set_coords,
)
from .sscfun import Ball, FuncExpr, PhiG, RegionSpec, WholeSpace, const, product_bump_fn

DECISION_RADII = 5


# -- topologies and schedules -------------------------------------------------------

@dataclass(frozen=True)
class NormP:
    p: float = 2.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p) and self.p >= 1):
            raise ValueError(f"p must be a finite real >= 1, got {self.p}")

    def to_json(self) -> dict:
        return {"kind": "norm", "p": self.p}


@dataclass(frozen=True)
class Pointwise:
    p: float = 2.0  # only used to measure perturbation sizes

    def to_json(self) -> dict:
        return {"kind": "pointwise"}


STYLES = ("coordinate", "random_direction", "pointwise_escape")


@dataclass(frozen=True)
class ApproachSchedule:
    radii: tuple[float, ...] = tuple(2.0 ** -j for j in range(21))
    samples_per_radius: int = 32
    seed: int = 0
    style: str = "coordinate"

    def __post_init__(self) -> None:
        r = tuple(float(v) for v in self.radii)
        object.__setattr__(self, "radii", r)
        if not r or any(v <= 0 for v in r) or any(b >= a for a, b in zip(r, r[1:])):
            raise ValueError("radii must be positive and strictly decreasing")
        if self.style not in STYLES:
            raise ValueError(f"unknown approach style {self.style!r}")
        if self.samples_per_radius < 0:
            raise ValueError("samples_per_radius must be nonnegative")

    @classmethod
    def dyadic(cls, j_max: int, step: int = 1, samples: int = 32, seed: int = 0,
               style: str = "coordinate") -> ApproachSchedule:
        return cls(tuple(2.0 ** -j for j in range(0, j_max + 1, step)), samples, seed, style)

    def to_json(self) -> dict:
        return {"radii": list(self.radii), "samples_per_radius": self.samples_per_radius,
                "seed": self.seed, "style": self.style}


# -- sampling near a point ------------------------------------------------------------

def _extent(a: SeqPoint, t: int) -> int:
    ext = max(a.support_max, t)
    if not a.tail.is_zero:
        ext = max(ext, int(a.tail.start))
    return ext


def _lp(v: np.ndarray, p: float) -> float:
    return float(np.sum(np.abs(v) ** p) ** (1.0 / p))


def _perturb(a: SeqPoint, idx: list[int], delta: np.ndarray) -> SeqPoint:
    return set_coords(a, {n: coord(a, n) + float(d) for n, d in zip(idx, delta)})


def approach_sample(a: SeqPoint, t: int, radius: float, j: int, topo, style: str,
                    rng: np.random.Generator, sample_index: int = 0) -> SeqPoint:
    """One point near ``a``: within ``radius`` in the metric for NormP, or
    within ``radius`` on the first ``j + 1`` coordinates for Pointwise."""
    p = topo.p
    if style == "pointwise_escape":
        if not isinstance(topo, Pointwise):
            raise PreconditionError("escape samples leave every norm ball")
        m = max(j + 2, int(1.0 / radius) + 1, t + 1) + sample_index
        return set_coords(a, {t: coord(a, t) + 1.0 / m, m: coord(a, m) + float(m)})
    ext = _extent(a, t)
    budget = 0.9 * radius * float(rng.uniform(0.2, 1.0))
    if style == "coordinate":
        k = int(rng.integers(0, 4))
        others = rng.choice(np.arange(1, ext + 9), size=k, replace=False) if k else []
        idx = sorted({t, *map(int, others)})
    else:
        idx = list(range(1, ext + 17))
    delta = rng.normal(size=len(idx))
    if not np.any(delta):
        delta[0] = 1.0
    with_tail = a.tail.is_zero and rng.random() < 0.3
    share = 0.7 if with_tail else 1.0
    delta *= share * budget / _lp(delta, p)
    x = _perturb(a, idx, delta)
    if with_tail:
        start = max(x.support_max, ext + 17) + 1
        g = small_geometric_tail(rng, start, 1.0)
        size = p_norm(make_point([], g), p).hi
        g = Geometric(g.c * (1 - share) * budget / size * 0.99, g.r, start)
        x = make_point(x.explicit, g)
    return x


# -- parallel map ---------------------------------------------------------------------

def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SSC_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# -- verdict rule -----------------------------------------------------------------------

@dataclass
class _RadiusResult:
    radius: float
    gaps: list[Interval]
    points: list[SeqPoint]

    def sup(self) -> Interval:
        if not self.gaps:
            return Interval(0.0, 0.0)
        return Interval(max(g.lo for g in self.gaps), max(g.hi for g in self.gaps),
                        any(g.unknown for g in self.gaps))


def _decide(results: list[_RadiusResult], tol: float, notes: list[str]) -> CheckReport:
    records = [RadiusRecord(r.radius, r.sup(), len(r.gaps)) for r in results]
    tail = results[-DECISION_RADII:]
    if any(g.unknown for r in tail for g in r.gaps):
        verdict = Verdict.unknown("a gap depended on an undecided classification")
        return CheckReport(verdict, records, [], "; ".join(notes))
    if all(r.gaps for r in tail) and all(r.sup().hi < tol for r in tail):
        return CheckReport(Verdict.true(), records, [], "; ".join(notes))
    witnesses = []
    for r in tail:
        best = max(range(len(r.gaps)), key=lambda i: r.gaps[i].lo, default=None)
        if best is None or not r.gaps[best].lo > tol:
            witnesses = None
            break
        witnesses.append((r.gaps[best], r.points[best]))
    if witnesses:
        gap, pt = witnesses[-1]
        notes.append(f"certified gap {gap.lo!r} at radius {tail[-1].radius!r}")
        return CheckReport(Verdict.false(), records, [pt], "; ".join(notes))
    return CheckReport(Verdict.unknown("gaps neither vanish nor stay above tol"),
                       records, [], "; ".join(notes))


def _safe_gap(f: FuncExpr, x: SeqPoint, ref, depth: int) -> Interval:
    try:
        fx = f.eval(x, depth)
        fr = ref if isinstance(ref, Interval) else f.eval(ref, depth)
        return abs(fx - fr)
    except SSCLabError:
        return Interval(0.0, 1e300, unknown=True)


def _run(gapfn, sched: ApproachSchedule, topo, target: SeqPoint, t: int, extra=None):
    results = []
    for i, r in enumerate(sched.radii):
        def one(s, i=i, r=r):
            rng = rng_for(sched.seed, i, s)
            x = approach_sample(target, t, r, i, topo, sched.style, rng, s)
            return x, gapfn(x)

        pairs = _pmap(one, range(sched.samples_per_radius))
        if extra is not None:
            for x in extra(r):
                pairs.append((x, gapfn(x)))
        results.append(_RadiusResult(r, [g for _, g in pairs], [x for x, _ in pairs]))
    return results


def ssc_check(f: FuncExpr, a: SeqPoint, t: int, topo, sched: ApproachSchedule | None = None,
              tol: float = 1e-6, depth: int = DEFAULT_DEPTH) -> CheckReport:
    """Does ``|f(x) - f(x_t^a)| -> 0`` as ``x -> a``?"""
    sched = sched or ApproachSchedule()
    notes = [f"ssc at t={t}", f"style={sched.style}"]
    if not sched.samples_per_radius:
        notes.append("no samples")
    results = _run(lambda x: _safe_gap(f, x, overwrite(x, t, a), depth), sched, topo, a, t)
    return _decide(results, tol, notes)


def continuity_check(f: FuncExpr, x0: SeqPoint, topo, sched: ApproachSchedule | None = None,
                     tol: float = 1e-6, depth: int = DEFAULT_DEPTH,
                     probe: Callable[[float], list[SeqPoint]] | str | None = "auto") -> CheckReport:
    """Does ``f(x) -> f(x0)``?

    ``probe(r)`` supplies extra candidate points within ``r``.  With the
    default ``"auto"``, a ``PhiG`` leaf at a point of its region is probed
    with the discontinuity witness for radius ``0.9 r``.
    """
    sched = sched or ApproachSchedule()
    notes = ["continuity", f"style={sched.style}"]
    ref = f.eval(x0, depth)
    if probe == "auto":
        probe = None
        if isinstance(f, PhiG) and isinstance(topo, NormP) and topo.p == f.p:
            if f.region.member(x0).is_true and ref.lo > 0:
                G, p = f.region, f.p

                def probe(r):
                    w = discontinuity_witness(G, p, x0, 0.9 * r)
                    return [] if isinstance(w, Infeasible) else [w]

                notes.append("witness probes")
    results = _run(lambda x: _safe_gap(f, x, ref, depth), sched, topo, x0, 1, probe)
    return _decide(results, tol, notes)


# -- discontinuity witnesses ----------------------------------------------------------------

@dataclass(frozen=True)
class Infeasible:
    reason: str


def _abs_coords(x: SeqPoint, M: int) -> np.ndarray:
    """``|x_n|`` for n = 1..M as doubles (index 0 unused)."""
    out = np.zeros(M + 1)
    t = x.tail
    if not t.is_zero and t.start <= M:
        n = np.arange(int(t.start), M + 1, dtype=float)
        inner = t.inner if isinstance(t, Masked) else t
        if isinstance(inner, Geometric):
            vals = np.abs(inner.c) * np.abs(inner.r) ** (n - inner.anchor)
        elif isinstance(inner, PowerLaw):
            vals = np.abs(inner.c) * n ** (-inner.s)
        else:
            vals = np.array([abs(t.value(int(k))) for k in n])
        if isinstance(t, Masked):
            k = n.astype(np.int64)
            blocks = np.log2(k & -k).astype(np.int64) + 1
            vals = np.where(blocks == t.block, vals, 0.0)
        out[int(t.start):] = vals
    for n, v in x.explicit:
        if n <= M:
            out[n] = abs(v)
    return out


_MAX_BLOCK_END = 1 << 18


def discontinuity_witness(G: RegionSpec, p: float, x0: SeqPoint, delta: float) -> SeqPoint | Infeasible:
    """A finite-support point within ``delta`` of ``x0`` where ``f = phi*g``
    has dropped below half of ``f(x0)``.

    A sign-matched harmonic block ``h_n = sgn(x0_n) c/n`` on ``[N0, M]``
    adds l_1 mass without spending much l_p mass; x0 is then cut off at M.
    """
    f = PhiG(G, p)
    if not G.member(x0).is_true:
        raise PreconditionError("witnesses exist only at points of the region")
    fx = f.eval(x0)
    if not fx.lo > 0:
        raise PreconditionError("f(x0) is not certifiably positive")
    target = fx.lo - fx.hi / 2
    if not target > 0:
        return Infeasible("f(x0) too uncertain")
    thr = -math.log(target) + 1e-6
    budget = 0.45 * delta
    if p == 1:
        l1 = p_norm(x0, 1).hi
        if l1 + delta <= thr:
            return Infeasible(f"l1 mass within delta is at most {l1 + delta!r} <= {thr!r}")

    start_min = x0.support_max
    base = x0.tail.start if not x0.tail.is_zero else None
    Mmax = _MAX_BLOCK_END
    if start_min >= Mmax:
        return Infeasible("x0 support too large")
    absx = _abs_coords(x0, Mmax)
    cum_abs = np.cumsum(absx)
    n = np.arange(Mmax + 1, dtype=float)
    n[0] = np.inf
    cum_h = np.cumsum(1.0 / n)
    cum_hp = np.cumsum(n ** (-p))

    best = None
    N0 = 1
    while N0 <= Mmax:
        M = max(N0, 1)
        while M <= Mmax:
            if M >= start_min and (base is None or x0.tail.remainder(M, p) ** (1 / p) <= budget):
                H = cum_h[M] - cum_h[N0 - 1]
                Hp = cum_hp[M] - cum_hp[N0 - 1]
                c = budget / Hp ** (1.0 / p)
                if cum_abs[M] + c * H > thr * (1 + 1e-9):
                    if best is None or M < best[1]:
                        best = (N0, M, c)
                    break
            M *= 2
        N0 *= 2
    if best is None:
        return Infeasible("no harmonic block meets both the l_p and l_1 constraints")
    N0, M, c = best
    # shrink c slightly so rounding cannot push the block past its budget
    c *= 1 - 1e-9
    entries = []
    for k in range(1, M + 1):
        v = coord(x0, k)
        if k >= N0:
            v = v + math.copysign(c / k, v if v != 0 else 1.0)
        if v != 0.0:
            entries.append((k, v))
    y = make_point(entries)
    d = dist_p(x0, y, p)
    gap = abs(fx - f.eval(y))
    if not (d.hi < delta and gap.lo > fx.hi / 2):
        return Infeasible(f"construction not certified: dist {d}, gap {gap}")
    return y


# -- ssc modulus --------------------------------------------------------------------------------

def ssc_modulus(G: RegionSpec, p: float, x0: SeqPoint, k: int, eps: float) -> float:
    """``min{delta_1, eps/4, ln(1 + eps/2)}`` where delta_1 keeps the ball
    around x0 inside G and eps/4 uses that phi is 1-Lipschitz."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not G.member(x0).is_true:
        raise PreconditionError("x0 is not a point of the region")
    d2 = eps / 4
    if isinstance(G, WholeSpace):
        # F is empty, phi is identically 1 and imposes nothing
        d1 = d2 = math.inf
    elif isinstance(G, Ball):
        if G.p != p:
            raise PreconditionError("ball measured in a different p")
        d1 = (Interval.point(G.radius) - dist_p(x0, G.center, p)).lo
    else:
        d1 = G.dist_to_complement(x0).lo
    return min(d1, d2, next_down(math.log1p(eps / 2)))


# -- Lipschitz ratios --------------------------------------------------------------------------------

def _default_pair(rng: np.random.Generator) -> tuple[SeqPoint, SeqPoint]:
    kinds = ("finite", "geometric", "powerlaw")
    x = scaled(random_point(rng, kinds), float(rng.uniform(0.2, 2.5)))
    y = scaled(random_point(rng, kinds), float(rng.uniform(0.2, 2.5)))
    return x, y


def lipschitz_ratio(f: Callable[[SeqPoint], SeqPoint], pairs: int, p: float, seed: int,
                    sampler: Callable | None = None, depth: int = DEFAULT_DEPTH) -> float:
    """Largest ``d(f x, f y).hi / d(x, y).lo`` over sampled pairs in the
    truncated metric; pairs whose distance may vanish are skipped."""
    sampler = sampler or _default_pair

    def one(i: int) -> float:
        x, y = sampler(rng_for(seed, 1, i))
        den = dist_trunc(x, y, p, depth)
        if not den.lo > 0:
            return 0.0
        return dist_trunc(f(x), f(y), p, depth).hi / den.lo

    return max(_pmap(one, range(pairs)), default=0.0)


# -- determining sets -------------------------------------------------------------------------------

@dataclass(frozen=True)
class NearlyOpenBox:
    """``(prod U_n) cap sigma(base)`` with open intervals on finitely many
    coordinates."""

    base: SeqPoint
    per_coordinate: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for n, (lo, hi) in self.per_coordinate.items():
            if not lo < hi:
                raise ValueError(f"empty interval on coordinate {n}")

    def center(self) -> SeqPoint:
        return set_coords(self.base, {n: 0.5 * (lo + hi) for n, (lo, hi) in self.per_coordinate.items()})

    def contains(self, x: SeqPoint) -> bool:
        return all(lo < coord(x, n) < hi for n, (lo, hi) in self.per_coordinate.items())

    def bump(self) -> FuncExpr:
        return product_bump_fn([(n, 0.5 * (lo + hi), 0.5 * (hi - lo))
                                for n, (lo, hi) in sorted(self.per_coordinate.items())], self.base)


@dataclass(frozen=True)
class FalsifyResult:
    outcome: str  # "emptiness", "member" or "unknown"
    witness: SeqPoint | None = None
    detail: str = ""


def superdensity_falsify(E: SetOracle, box: NearlyOpenBox, budget: int, seed: int) -> FalsifyResult:
    if budget <= 0:
        return FalsifyResult("unknown", detail="no search budget")
    if E.separable is not None:
        choice = {}
        for n, allowed in E.separable.items():
            lo, hi = box.per_coordinate.get(n, (-math.inf, math.inf))
            inside = sorted(v for v in allowed if lo < v < hi)
            if not inside:
                return FalsifyResult("emptiness", detail=f"coordinate {n}: no admissible value in ({lo}, {hi})")
            choice[n] = inside[0]
        cand = set_coords(box.center(), choice)
        if box.contains(cand) and E.membership(cand).is_true:
            return FalsifyResult("member", cand, "separable construction")
    cands = [box.center(), make_point(box.center().explicit)]
    rng = rng_for(seed, 2, 0)
    while len(cands) < budget:
        vals = {n: float(rng.uniform(lo, hi)) for n, (lo, hi) in box.per_coordinate.items()}
        cands.append(set_coords(box.base, vals))
    for x in cands[:budget]:
        if box.contains(x) and E.membership(x).is_true:
            return FalsifyResult("member", x, "grid search")
    return FalsifyResult("unknown", detail=f"{budget} candidates, no member")


def determining_demo(E: SetOracle, box: NearlyOpenBox, samples: int, seed: int) -> CheckReport:
    """Two ssc functions (a product bump and 0) that agree on E yet differ
    at the box centre, so E does not determine the class."""
    res = superdensity_falsify(E, box, max(samples, 1), seed)
    if res.outcome != "emptiness":
        raise PreconditionError(f"box is not a certified falsifier ({res.outcome})")
    f, g = box.bump(), const(0.0)
    zero = Interval(0.0, 0.0)
    bad = []
    for i in range(samples):
        x = E.sampler(rng_for(seed, 3, i))
        if not E.membership(x).is_true or f.eval(x) != zero or g.eval(x) != zero:
            bad.append(x)
    centre = box.center()
    fc = f.eval(centre)
    notes = [res.detail, f"f(centre) = [{fc.lo!r}, {fc.hi!r}]", f"{samples - len(bad)}/{samples} E-samples agree"]
    if samples == 0:
        notes.append("vacuous: no E samples")
    ok = not bad and fc.lo > 0
    return CheckReport(Verdict.of(ok), [], [centre] + bad, "; ".join(notes))
