"""Expression trees of real functions on l_p, evaluated to certified
intervals.

Leaves: constants, indicators of the Borel classes, the prescribed
discontinuity function ``phi * g`` of an open region, the two-family
distance quotient and product bumps.  Nodes: + - * abs min max and
uniformly convergent series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .borel import DYADIC, ClassIndex, PartitionScheme, class_membership, scheme_from_json
from .errors import DegenerateDenominator, PreconditionError
from .interval import Interval, add_rd, add_ru, div_rd, div_ru, imax, imin, isum
from .outcome import Verdict
from .seqpoint import (
    DEFAULT_DEPTH,
    SeqPoint,
    ZERO_POINT,
    coord_interval,
    dist_p,
    make_point,
    point_from_json,
    point_to_json,
    set_coord,
)


# -- regions ------------------------------------------------------------------

class RegionSpec:
    """An open set G; F denotes its complement."""

    def dist_to_complement(self, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
        raise NotImplementedError

    def member(self, x: SeqPoint) -> Verdict:
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(RegionSpec):
    center: SeqPoint
    radius: float
    p: float = 2.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"ball radius must be finite and positive, got {self.radius}")
        if not (math.isfinite(self.p) and self.p >= 1):
            raise ValueError(f"p must be >= 1, got {self.p}")

    def dist_to_complement(self, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
        d = Interval.point(self.radius) - dist_p(x, self.center, self.p, depth)
        return imax(d, 0.0)

    def member(self, x: SeqPoint) -> Verdict:
        d = dist_p(x, self.center, self.p)
        if d.hi < self.radius:
            return Verdict.true()
        if d.lo >= self.radius:
            return Verdict.false()
        return Verdict.unknown("point within rounding of the sphere")


@dataclass(frozen=True)
class WholeSpace(RegionSpec):
    def dist_to_complement(self, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
        # F is empty; only min{d(x,F), 1} = 1 is ever used
        return Interval(1.0, 1.0)

    def member(self, x: SeqPoint) -> Verdict:
        return Verdict.true()


@dataclass(frozen=True)
class OracleRegion(RegionSpec):
    distance: Callable[[SeqPoint, int], Interval] = field(compare=False)
    membership: Callable[[SeqPoint], Verdict] = field(compare=False)
    name: str = "oracle"

    def dist_to_complement(self, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
        return self.distance(x, depth)

    def member(self, x: SeqPoint) -> Verdict:
        return self.membership(x)


def region_to_json(g: RegionSpec) -> dict:
    if isinstance(g, Ball):
        return {"kind": "ball", "center": point_to_json(g.center), "radius": g.radius, "p": g.p}
    if isinstance(g, WholeSpace):
        return {"kind": "whole"}
    raise TypeError(f"{type(g).__name__} regions are not serialisable")


def region_from_json(d: dict) -> RegionSpec:
    if d["kind"] == "ball":
        center = point_from_json(d.get("center", {"explicit": [], "tail": {"kind": "zero"}}))
        return Ball(center, float(d["radius"]), float(d.get("p", 2.0)))
    if d["kind"] == "whole":
        return WholeSpace()
    raise ValueError(f"unknown region kind {d['kind']!r}")


# -- discrete point families ----------------------------------------------------

@dataclass(frozen=True)
class PointFamily:
    """``{generator(n) : n >= first}`` with ``growth(n) <= ||generator(n)||``
    monotone and unbounded.

    ``spike(n) -> (index, value)`` optionally names a coordinate of
    ``generator(n)``; it gives the sharper bound
    ``d(x, generator(n)) >= |value| - sup|x_index|`` for indices outside
    x's explicit support.
    """

    generator: Callable[[int], SeqPoint] = field(compare=False)
    growth: Callable[[int], float] = field(compare=False)
    first: int = 1
    spike: Callable[[int], tuple[int, float]] | None = field(default=None, compare=False)
    name: str = "family"

    def distance(self, x: SeqPoint, p: float, depth: int = DEFAULT_DEPTH) -> Interval:
        """Certified ``inf_n d_p(x, generator(n))`` by pruned search."""
        xn = dist_p(x, ZERO_POINT, p, depth).hi
        tail_sup = x.tail.sup_abs()
        best_lo, best_hi = math.inf, math.inf
        seen = set()

        def visit(n: int) -> None:
            nonlocal best_lo, best_hi
            seen.add(n)
            d = dist_p(x, self.generator(n), p, depth)
            best_lo, best_hi = min(best_lo, d.lo), min(best_hi, d.hi)

        if self.spike is not None:
            for n, _ in x.explicit:
                if n >= self.first:
                    visit(n)
        n = self.first
        while True:
            if n not in seen:
                bound = self.growth(n) - xn
                if self.spike is not None:
                    bound = max(bound, abs(self.spike(n)[1]) - tail_sup)
                if bound > best_hi:
                    break
                visit(n)
            n += 1
        return Interval(best_lo, best_hi)


def _x_family(n: int) -> SeqPoint:
    return make_point([(1, 1.0 / n), (n, float(n))])


def _y_family(n: int) -> SeqPoint:
    return make_point([(n, float(n))])


# n = 1 is excluded: both displayed entries of x_1 sit on coordinate 1 and
# x_1 would coincide with y_1, so the families would not be disjoint.
EXAMPLE_F1 = PointFamily(_x_family, lambda n: n - 1.0, 2, lambda n: (n, float(n)), "x_n")
EXAMPLE_F2 = PointFamily(_y_family, lambda n: n - 1.0, 2, lambda n: (n, float(n)), "y_n")


def example_x(n: int) -> SeqPoint:
    return _x_family(n)


def example_y(n: int) -> SeqPoint:
    return _y_family(n)


def distance_quotient(d1: Interval, d2: Interval) -> Interval:
    """Certified ``d1 / (d1 + d2)`` for nonnegative intervals (monotone in
    each argument, so endpoints pair up)."""
    if not add_rd(d1.lo, d2.lo) > 0.0:
        raise DegenerateDenominator(f"denominator {d1} + {d2} may vanish")
    lo = div_rd(d1.lo, add_ru(d1.lo, d2.hi)) if d1.lo > 0 else 0.0
    hi = div_ru(d1.hi, add_rd(d1.hi, d2.lo)) if d1.hi > 0 else 0.0
    return Interval(lo, min(hi, 1.0), d1.unknown or d2.unknown)


# -- expression trees -------------------------------------------------------------

class FuncExpr:
    def eval(self, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
        raise NotImplementedError

    def children(self) -> tuple[FuncExpr, ...]:
        return ()

    def __add__(self, other: FuncExpr) -> FuncExpr:
        return Add(self, other)

    def __sub__(self, other: FuncExpr) -> FuncExpr:
        return Sub(self, other)

    def __mul__(self, other: FuncExpr) -> FuncExpr:
        return Mul(self, other)


@dataclass(frozen=True)
class Const(FuncExpr):
    c: float

    def eval(self, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
        return Interval(self.c, self.c)


@dataclass(frozen=True)
class ChiClass(FuncExpr):
    cls: ClassIndex
    scheme: PartitionScheme = DYADIC

    def eval(self, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
        v = class_membership(x, self.cls, self.scheme)
        if v.is_unknown:
            return Interval(0.0, 1.0, unknown=True)
        return Interval(1.0, 1.0) if v.is_true else Interval(0.0, 0.0)


@dataclass(frozen=True)
class PhiG(FuncExpr):
    """``min{d(x,F), 1} * g(x)`` with ``g = exp(-sum |x_n|)`` on the
    finite-support points and ``g = 1`` elsewhere."""

    region: RegionSpec
    p: float = 2.0

    def phi(self, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
        return imin(self.region.dist_to_complement(x, depth), 1.0)

    @staticmethod
    def g(x: SeqPoint) -> Interval:
        if not x.tail.is_zero:
            return Interval(1.0, 1.0)
        s = isum(Interval(abs(v), abs(v)) for _, v in x.explicit)
        return (-s).exp()

    def eval(self, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
        return self.phi(x, depth) * self.g(x)


@dataclass(frozen=True)
class Example41(FuncExpr):
    """``d_2(x,F_1) / (d_2(x,F_1) + d_2(x,F_2))`` for the spike families
    ``x_n = e_1/n + n e_n`` and ``y_n = n e_n`` (n >= 2)."""

    p: float = 2.0

    def eval(self, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
        d1 = EXAMPLE_F1.distance(x, self.p, depth)
        d2 = EXAMPLE_F2.distance(x, self.p, depth)
        return distance_quotient(d1, d2)


@dataclass(frozen=True)
class ProductBump(FuncExpr):
    """``prod_n max(0, 1 - |x_n - center_n| / halfwidth_n)`` over the listed
    coordinates; positive exactly on the box of open intervals."""

    bumps: tuple[tuple[int, float, float], ...]
    base: SeqPoint = ZERO_POINT

    def __post_init__(self) -> None:
        object.__setattr__(self, "bumps", tuple((int(n), float(c), float(h)) for n, c, h in self.bumps))
        for n, c, h in self.bumps:
            if not h > 0:
                raise ValueError(f"hat half-width must be positive, got {h}")
        if len({n for n, _, _ in self.bumps}) != len(self.bumps):
            raise ValueError("one hat per coordinate")

    def eval(self, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
        out = Interval(1.0, 1.0)
        for n, c, h in self.bumps:
            hat = imax(1.0 - abs(coord_interval(x, n) - c) / h, 0.0)
            out = out * hat
        return out


@dataclass(frozen=True)
class _Binary(FuncExpr):
    f: FuncExpr
    g: FuncExpr

    def children(self):
        return (self.f, self.g)


class Add(_Binary):
    def eval(self, x, depth=DEFAULT_DEPTH):
        return self.f.eval(x, depth) + self.g.eval(x, depth)


class Sub(_Binary):
    def eval(self, x, depth=DEFAULT_DEPTH):
        return self.f.eval(x, depth) - self.g.eval(x, depth)


class Mul(_Binary):
    def eval(self, x, depth=DEFAULT_DEPTH):
        return self.f.eval(x, depth) * self.g.eval(x, depth)


class Min(_Binary):
    def eval(self, x, depth=DEFAULT_DEPTH):
        return imin(self.f.eval(x, depth), self.g.eval(x, depth))


class Max(_Binary):
    def eval(self, x, depth=DEFAULT_DEPTH):
        return imax(self.f.eval(x, depth), self.g.eval(x, depth))


@dataclass(frozen=True)
class Abs(FuncExpr):
    f: FuncExpr

    def children(self):
        return (self.f,)

    def eval(self, x, depth=DEFAULT_DEPTH):
        return abs(self.f.eval(x, depth))


@dataclass(frozen=True)
class UniformSeries(FuncExpr):
    """``sum_{n>=1} terms(n)`` with ``|terms(n)| <= bounds(n)`` everywhere.

    ``tail(N)`` must bound ``sum_{n>N} bounds(n)``.  Evaluation stops at
    the first N with ``tail(N) < slack`` and widens by ``tail(N)``.
    """

    terms: Callable[[int], FuncExpr] = field(compare=False)
    bounds: Callable[[int], float] = field(compare=False)
    tail: Callable[[int], float] = field(compare=False)
    slack: float = 1e-12
    max_terms: int = 100_000
    spec: dict | None = None

    def cutoff(self) -> int:
        for N in range(0, self.max_terms + 1):
            if self.tail(N) < self.slack:
                return N
        raise PreconditionError("series bounds do not reach the requested slack")

    def eval(self, x, depth=DEFAULT_DEPTH):
        N = self.cutoff()
        s = isum(self.terms(n).eval(x, depth) for n in range(1, N + 1))
        r = self.tail(N)
        return s + Interval(-r, r)


# -- constructors ---------------------------------------------------------------

def const(c: float) -> FuncExpr:
    return Const(float(c))


def chi_class(c: ClassIndex, scheme: PartitionScheme = DYADIC) -> FuncExpr:
    return ChiClass(c, scheme)


def prescribed_discontinuity_fn(G: RegionSpec, p: float = 2.0) -> FuncExpr:
    return PhiG(G, float(p))


def example41_fn() -> FuncExpr:
    return Example41()


def product_bump_fn(bumps: Iterable[tuple[int, float, float]], base: SeqPoint = ZERO_POINT) -> FuncExpr:
    return ProductBump(tuple(bumps), base)


def add(f, g):
    return Add(f, g)


def sub(f, g):
    return Sub(f, g)


def mul(f, g):
    return Mul(f, g)


def fabs(f):
    return Abs(f)


def fmin(f, g):
    return Min(f, g)


def fmax(f, g):
    return Max(f, g)


def uniform_series(terms, bounds, tail, slack: float = 1e-12) -> FuncExpr:
    return UniformSeries(terms, bounds, tail, slack)


def geometric_series(expr: FuncExpr, scale: float, ratio: float, bound: float,
                     slack: float = 1e-12) -> FuncExpr:
    """``sum_n scale * ratio^n * expr`` where ``|expr| <= bound``."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    a = abs(scale) * bound

    def tail_bound(N: int) -> float:
        # one ulp-level safety factor on a closed-form geometric tail
        return a * ratio ** (N + 1) / (1 - ratio) * (1 + 1e-9)

    return UniformSeries(
        lambda n: Mul(Const(scale * ratio ** n), expr),
        lambda n: a * ratio ** n,
        tail_bound,
        slack,
        spec={"expr": expr, "scale": scale, "ratio": ratio, "bound": bound},
    )


def evaluate(f: FuncExpr, x: SeqPoint, depth: int = DEFAULT_DEPTH) -> Interval:
    return f.eval(x, depth)


def finite_section(f: FuncExpr, a: SeqPoint, T0, depth: int = DEFAULT_DEPTH):
    """``v -> f(a with coordinates T0 replaced by v)``."""
    idx = sorted(T0)

    def section(v) -> Interval:
        if len(v) != len(idx):
            raise ValueError(f"expected {len(idx)} values")
        x = a
        for n, val in sorted(zip(idx, v), reverse=True):
            x = set_coord(x, n, float(val))
        return f.eval(x, depth)

    return section


# -- serialisation ----------------------------------------------------------------

_BINARY = {"add": Add, "sub": Sub, "mul": Mul, "min": Min, "max": Max}


def func_to_json(f: FuncExpr) -> dict:
    if isinstance(f, Const):
        return {"kind": "const", "c": f.c}
    if isinstance(f, ChiClass):
        return {"kind": "chi", "class": f.cls.to_json(), "scheme": f.scheme.to_json()}
    if isinstance(f, PhiG):
        return {"kind": "phig", "region": region_to_json(f.region), "p": f.p}
    if isinstance(f, Example41):
        return {"kind": "example41"}
    if isinstance(f, ProductBump):
        return {"kind": "product_bump", "bumps": [list(b) for b in f.bumps],
                "base": point_to_json(f.base)}
    if isinstance(f, Abs):
        return {"kind": "abs", "arg": func_to_json(f.f)}
    for name, cls in _BINARY.items():
        if type(f) is cls:
            return {"kind": name, "args": [func_to_json(f.f), func_to_json(f.g)]}
    if isinstance(f, UniformSeries) and f.spec is not None:
        s = f.spec
        return {"kind": "geometric_series", "expr": func_to_json(s["expr"]), "scale": s["scale"],
                "ratio": s["ratio"], "bound": s["bound"], "slack": f.slack}
    raise TypeError(f"{type(f).__name__} is not serialisable")


def func_from_json(d: dict) -> FuncExpr:
    kind = d["kind"]
    if kind == "const":
        return Const(float(d["c"]))
    if kind == "chi":
        return ChiClass(ClassIndex.from_json(d["class"]), scheme_from_json(d.get("scheme", {})))
    if kind == "phig":
        return PhiG(region_from_json(d["region"]), float(d.get("p", 2.0)))
    if kind == "example41":
        return Example41()
    if kind == "product_bump":
        base = point_from_json(d["base"]) if "base" in d else ZERO_POINT
        return ProductBump(tuple(tuple(b) for b in d["bumps"]), base)
    if kind == "abs":
        return Abs(func_from_json(d["arg"]))
    if kind in _BINARY:
        a, b = d["args"]
        return _BINARY[kind](func_from_json(a), func_from_json(b))
    if kind == "geometric_series":
        return geometric_series(func_from_json(d["expr"]), float(d["scale"]), float(d["ratio"]),
                                float(d["bound"]), float(d.get("slack", 1e-12)))
    raise ValueError(f"unknown function kind {kind!r}")


def leaves(f: FuncExpr):
    kids = f.children()
    if isinstance(f, UniformSeries) and f.spec is not None:
        kids = (f.spec["expr"],)
    if not kids:
        yield f
    for k in kids:
        yield from leaves(k)
