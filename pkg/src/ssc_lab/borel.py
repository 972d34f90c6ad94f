"""Block partitions of the index set, the successor-rule Borel classes
A_alpha / B_alpha, contracting maps onto them and Banach iteration.

Membership for alpha >= 2 is evaluated through the eventual block
projection: changing finitely many blocks never changes "for all n >= m", so
only the projection onto a block past every explicit entry (and past a
masked block) matters.  Two consecutive such blocks are evaluated and must
agree, otherwise the verdict is Unknown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import NoConvergence, PreconditionError, Unrepresentable, WidthExceeded
from .interval import Interval, imin
from .outcome import CheckReport, Verdict
from .sampling import random_point, rng_for
from .seqpoint import (
    DEFAULT_DEPTH,
    Geometric,
    Masked,
    PowerLaw,
    Projected,
    SeqPoint,
    coord,
    dist_p,
    dist_trunc,
    _first_position_at_least,
    dyadic_from_flat,
    dyadic_to_flat,
    make_point,
    project,
    set_coord,
)


# -- partitions -----------------------------------------------------------

@dataclass(frozen=True)
class PartitionScheme:
    to_flat: Callable[[int, int], int]
    from_flat: Callable[[int], tuple[int, int]]
    name: str = "custom"

    def block(self, k: int) -> int:
        return self.from_flat(k)[0]

    def to_json(self) -> dict:
        return {"name": self.name}


DYADIC = PartitionScheme(dyadic_to_flat, dyadic_from_flat, "dyadic")


def default_scheme() -> PartitionScheme:
    return DYADIC


def scheme_from_json(d: dict) -> PartitionScheme:
    if d.get("name", "dyadic") != "dyadic":
        raise ValueError(f"unknown partition scheme {d.get('name')!r}")
    return DYADIC


def check_scheme(scheme: PartitionScheme, limit: int = 1 << 16) -> None:
    """Exhaustive round-trip and monotonicity check on indices <= limit."""
    for k in range(1, limit + 1):
        n, m = scheme.from_flat(k)
        if scheme.to_flat(n, m) != k:
            raise PreconditionError(f"scheme does not round-trip at {k}")
        if m > 1 and scheme.to_flat(n, m - 1) >= k:
            raise PreconditionError(f"block {n} not increasing at position {m}")


# -- classes --------------------------------------------------------------

@dataclass(frozen=True)
class ClassIndex:
    alpha: int
    kind: str = "A"

    def __post_init__(self) -> None:
        if isinstance(self.alpha, bool) or not isinstance(self.alpha, int) or self.alpha < 1:
            raise ValueError(f"class index must be a positive integer, got {self.alpha!r}")
        if self.kind not in ("A", "B"):
            raise ValueError(f"class kind is 'A' or 'B', got {self.kind!r}")

    def complement(self) -> ClassIndex:
        return ClassIndex(self.alpha, "B" if self.kind == "A" else "A")

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "kind": self.kind}

    @classmethod
    def from_json(cls, d: dict) -> ClassIndex:
        return cls(int(d["alpha"]), d.get("kind", "A"))

    def __str__(self) -> str:
        return f"{self.kind}{self.alpha}"


def _generic_block(x: SeqPoint, scheme: PartitionScheme) -> int:
    b = 1
    for n, _ in x.explicit:
        b = max(b, scheme.block(n) + 1)
    if isinstance(x.tail, Masked):
        b = max(b, x.tail.block + 1)
    return b


def _in_A(x: SeqPoint, alpha: int, scheme: PartitionScheme) -> bool | None:
    if alpha == 1:
        return x.tail.is_zero
    b = _generic_block(x, scheme)
    first = _in_A(project(x, b, scheme), alpha - 1, scheme)
    second = _in_A(project(x, b + 1, scheme), alpha - 1, scheme)
    if first is None or second is None or first != second:
        return None
    return not first


def class_membership(x: SeqPoint, c: ClassIndex, scheme: PartitionScheme = DYADIC) -> Verdict:
    try:
        r = _in_A(x, c.alpha, scheme)
    except Unrepresentable as exc:
        return Verdict.unknown(f"projection not representable: {exc}")
    if r is None:
        return Verdict.unknown("block projections did not stabilise")
    v = Verdict.of(r)
    return v if c.kind == "A" else v.negate()


def class_is_s_open_check(c: ClassIndex, samples: int, seed: int,
                          scheme: PartitionScheme = DYADIC) -> CheckReport:
    """Membership must be unchanged by any single-coordinate change."""
    if samples == 0:
        return CheckReport(Verdict.true(), notes="vacuous: no samples")
    violations = []
    decided = 0
    for i in range(samples):
        rng = rng_for(seed, 0, i)
        x = random_point(rng)
        t = int(rng.integers(1, 24))
        y = set_coord(x, t, float(rng.uniform(-3.0, 3.0)))
        vx, vy = class_membership(x, c, scheme), class_membership(y, c, scheme)
        if vx.decided and vy.decided:
            decided += 1
            if vx.value != vy.value:
                violations.extend([x, y])
    verdict = Verdict.false() if violations else Verdict.true()
    return CheckReport(verdict, witnesses=violations,
                       notes=f"{c}: {decided}/{samples} pairs decided, "
                             f"{len(violations) // 2} violations")


# -- set oracles ------------------------------------------------------------

@dataclass(frozen=True)
class SetOracle:
    """A subset of l_p given by its capabilities.

    ``separable`` optionally declares coordinate-separable membership:
    ``{n: allowed}`` means x is a member iff ``coord(x, n)`` lies in the
    finite set ``allowed`` for every listed n (and nothing else matters).
    """

    membership: Callable[[SeqPoint], Verdict]
    distance: Callable[[SeqPoint, float, int], Interval]
    closed: bool = True
    name: str = "set"
    separable: dict | None = None
    sampler: Callable | None = field(default=None, compare=False)


def closed_ball(center: SeqPoint, radius: float, p: float) -> SetOracle:
    radius = float(radius)
    if not radius > 0:
        raise ValueError("ball radius must be positive")

    def member(x: SeqPoint) -> Verdict:
        d = dist_p(x, center, p)
        if d.hi <= radius:
            return Verdict.true()
        if d.lo > radius:
            return Verdict.false()
        return Verdict.unknown("point within rounding of the sphere")

    def distance(x: SeqPoint, q: float, depth: int = DEFAULT_DEPTH) -> Interval:
        if q != p:
            raise PreconditionError("ball oracle distance only for its own p")
        d = dist_p(x, center, p, depth) - radius
        return Interval(max(0.0, d.lo), max(0.0, d.hi), d.unknown)

    return SetOracle(member, distance, True, f"ball(r={radius!r}, p={p!r})")


def coordinate_zero_set(n: int = 1) -> SetOracle:
    """``{x : coord(x, n) = 0}``, closed and coordinate-separable."""

    def member(x: SeqPoint) -> Verdict:
        return Verdict.of(coord(x, n) == 0.0)

    def distance(x: SeqPoint, p: float, depth: int = DEFAULT_DEPTH) -> Interval:
        v = abs(coord(x, n))
        return Interval(v, v)

    def sampler(rng):
        x = random_point(rng, ("finite", "geometric"))
        return set_coord(x, n, 0.0)

    return SetOracle(member, distance, True, f"coord{n}=0", {n: frozenset({0.0})}, sampler)


def finite_support_set() -> SetOracle:
    """Finite-support points (rational coordinates, as every double is)."""

    def member(x: SeqPoint) -> Verdict:
        return Verdict.of(x.tail.is_zero)

    def distance(x: SeqPoint, p: float, depth: int = DEFAULT_DEPTH) -> Interval:
        return Interval(0.0, 0.0)

    return SetOracle(member, distance, False, "finite-support", None,
                     lambda rng: random_point(rng, ("finite",)))


def whole_space_set() -> SetOracle:
    return SetOracle(lambda x: Verdict.true(), lambda x, p, depth=DEFAULT_DEPTH: Interval(0.0, 0.0),
                     True, "all-points", None, lambda rng: random_point(rng))


# -- contracting maps ---------------------------------------------------------

_THIRD = 1.0 / 3.0
_WIDTH_LIMIT = 1e-9


def _trunc_distance(C: SetOracle, x: SeqPoint, p: float, depth: int) -> float:
    d = imin(C.distance(x, p, depth), 1.0)
    if d.width > _WIDTH_LIMIT:
        raise WidthExceeded(f"distance to {C.name} known only to {d}")
    return d.mid


def contracting_image(C, x: SeqPoint, p: float, depth: int = DEFAULT_DEPTH) -> SeqPoint:
    """``(d(x,C_1)/3, d(x,C_2)/9, ...)`` with ``d`` the truncated metric.

    ``C`` is a single oracle (constant chain), a list whose last entry
    repeats, or a callable ``n -> oracle`` (truncated at ``depth``).
    """
    if isinstance(C, SetOracle):
        C = [C]
    if isinstance(C, Sequence):
        if not C:
            raise ValueError("empty chain")
        L = len(C)
        entries = []
        for n in range(1, L):
            entries.append((n, _trunc_distance(C[n - 1], x, p, depth) * 3.0 ** -n))
        last = _trunc_distance(C[-1], x, p, depth)
        if last == 0.0:
            return make_point(entries)
        return make_point(entries, Geometric(last * 3.0 ** -L, _THIRD, L))
    entries = [(n, _trunc_distance(C(n), x, p, depth) * 3.0 ** -n) for n in range(1, depth + 1)]
    return make_point(entries)


def successor_image(sub_maps, x: SeqPoint, scheme: PartitionScheme = DYADIC,
                    depth: int = DEFAULT_DEPTH) -> SeqPoint:
    """Coordinate k is ``3^-(k+1) * coord(f_{n(k)}(x), m(k))`` where
    ``(n(k), m(k))`` is the block position of k.  Beyond ``depth`` the
    result is cut off; the discarded mass is at most ``sum_{k>depth} 3^-(k+1)``.
    """
    cache: dict[int, SeqPoint] = {}

    def image(n: int) -> SeqPoint:
        if n not in cache:
            if callable(sub_maps):
                f = sub_maps(n)
            else:
                f = sub_maps[min(n, len(sub_maps)) - 1]
            cache[n] = f(x)
        return cache[n]

    entries = []
    for k in range(1, depth + 1):
        n, m = scheme.from_flat(k)
        v = coord(image(n), m)
        if abs(v) > 1.0:
            raise PreconditionError(f"sub-map {n} has coordinate {m} of size {v} > 1")
        entries.append((k, v * 3.0 ** -(k + 1)))
    return make_point(entries)


def successor_cutoff(depth: int) -> float:
    return 3.0 ** -(depth + 1) / 2.0


def fixed_point(f: Callable[[SeqPoint], SeqPoint], x0: SeqPoint, p: float, tol: float,
                max_iter: int, depth: int = DEFAULT_DEPTH,
                trace: list | None = None) -> tuple[SeqPoint, Interval]:
    """Banach iteration in the truncated metric.

    Returns the first iterate ``x_k`` with ``d(x_k, f(x_k)).hi < tol``
    together with that residual.  ``trace``, if given, collects residuals.
    """
    x = x0
    for _ in range(max_iter + 1):
        y = f(x)
        res = dist_trunc(x, y, p, depth)
        if trace is not None:
            trace.append(res)
        if res.hi < tol:
            return x, res
        x = y
    raise NoConvergence(f"residual {res} after {max_iter} iterations")


# -- Baire class two representation of chi_{A_1} ------------------------------

def _window_max_abs(x: SeqPoint, lo: int, hi: int) -> float:
    best = 0.0
    for n, v in x.explicit:
        if lo <= n <= hi:
            best = max(best, abs(v))
    t = x.tail
    if t.is_zero:
        return best
    first = max(lo, t.start)
    if first > hi:
        return best
    if isinstance(t, (Geometric, PowerLaw, Projected)):
        # these tails are monotone in absolute value
        return max(best, abs(t.value(first)))
    if isinstance(t, Masked):
        n = dyadic_to_flat(t.block, _first_position_at_least(dyadic_to_flat, t.block, first))
        return max(best, abs(t.value(n))) if n <= hi else best
    return max(best, max(abs(coord(x, n)) for n in range(first, hi + 1)))


def baire2_indicator_A1(x: SeqPoint, m: int, j: int) -> float:
    """``h_{m,j}(x) = max(0, 1 - j * max_{m <= n <= m+j} |x_n|)``.

    Each h is continuous; ``lim_m lim_j h_{m,j} = chi_{A_1}``.
    """
    return max(0.0, 1.0 - j * _window_max_abs(x, m, m + j))


def j_grid(m: int) -> list[int]:
    grid, j = [], 1
    while j <= (1 << m):
        grid.append(j)
        j *= 2
    return grid + [(1 << m) + 1]


def baire2_iterated_limit(x: SeqPoint, m_max: int | None = None) -> tuple[float | None, list[float]]:
    """Inner limits ``lim_j h_{m,j}`` for m = 1..m_max and the outer limit.

    An inner limit counts as reached when the last two grid values agree;
    the outer limit is the common value of the last three m, else None.
    """
    if m_max is None:
        anchor = x.support_max if x.tail.is_zero else max(x.support_max, int(x.tail.start))
        m_max = anchor + 3
    inner = []
    for m in range(1, m_max + 1):
        vals = [baire2_indicator_A1(x, m, j) for j in j_grid(m)]
        inner.append(vals[-1] if vals[-1] == vals[-2] else math.nan)
    last = inner[-3:]
    if any(math.isnan(v) for v in last) or len(set(last)) != 1:
        return None, inner
    return last[0], inner


__all__ = [
    "PartitionScheme", "DYADIC", "default_scheme", "scheme_from_json", "check_scheme",
    "ClassIndex", "class_membership", "class_is_s_open_check",
    "SetOracle", "closed_ball", "coordinate_zero_set", "finite_support_set", "whole_space_set",
    "contracting_image", "successor_image", "successor_cutoff", "fixed_point",
    "baire2_indicator_A1", "baire2_iterated_limit", "j_grid",
]
