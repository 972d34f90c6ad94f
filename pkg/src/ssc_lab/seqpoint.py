"""Finite representations of points of l_p and certified l_p geometry.

A :class:`SeqPoint` is a finite map of explicit coordinates followed by a
closed-form :class:`Tail`.  Coordinates of tails are the *real* numbers given
by the tail formula with double parameters; ``coord`` returns the nearest
double it can compute, while all metric routines work with certified
enclosures of the real values.

Canonical form: explicit values are nonzero, every explicit index is below
``tail.start``, and ``tail.start`` is as small as the explicit data allows
(an explicit entry that coincides with the tail formula is folded back into
the tail).  Equality of points is structural equality of canonical forms.
"""

from __future__ import annotations

import decimal
import functools
import json
import math

import numpy as np
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable

from .errors import Unrepresentable
from .interval import Interval, add_rd, add_ru, imin, isum, mul_rd, mul_ru, next_down, next_up, sub_rd, sub_ru

DEFAULT_DEPTH = 64


# -- dyadic partition of the index set ------------------------------------
# block n, position m  <->  2**(n-1) * (2m - 1)

def dyadic_to_flat(n: int, m: int) -> int:
    return (1 << (n - 1)) * (2 * m - 1)


def dyadic_from_flat(k: int) -> tuple[int, int]:
    v = (k & -k).bit_length() - 1
    return v + 1, ((k >> v) + 1) // 2


def dyadic_block(k: int) -> int:
    return (k & -k).bit_length()


def _first_position_at_least(to_flat, block: int, bound: int) -> int:
    """Smallest m with to_flat(block, m) >= bound (to_flat increasing in m)."""
    if to_flat(block, 1) >= bound:
        return 1
    lo, hi = 1, 2
    while to_flat(block, hi) < bound:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if to_flat(block, mid) >= bound:
            hi = mid
        else:
            lo = mid
    return hi


# -- exactness helpers ----------------------------------------------------

def _is_dyadic(r: float) -> bool:
    return r == 0.0 or math.frexp(abs(r))[0] == 0.5


_DEC = decimal.Context(prec=60, Emin=-10 ** 9, Emax=10 ** 9)
_DEC_MARGIN = decimal.Decimal("1e-55")


def _rounded_geometric(c: float, r: float, k: int) -> float:
    """``c * r**k`` rounded once to the nearest double, so the value does not
    depend on which index the formula is anchored at."""
    if r == 0.0 or c == 0.0:
        return c if k == 0 else 0.0
    if _is_dyadic(r):
        v = c * r ** k
        if abs(v) >= 2.2250738585072014e-308 and math.isfinite(v):
            return v
    d = _DEC.multiply(decimal.Decimal(c), _DEC.power(decimal.Decimal(r), k))
    lo = float(_DEC.multiply(d, 1 - _DEC_MARGIN))
    hi = float(_DEC.multiply(d, 1 + _DEC_MARGIN))
    if lo == hi:
        return lo
    # too close to a rounding boundary for 60 digits; settle it exactly
    return float(Fraction(c) * Fraction(r) ** k)


def _widened_arrays(v: np.ndarray, ulps: int = 4):
    u = np.spacing(np.abs(v)) * ulps
    u = np.where(v == 0.0, 5e-324 * ulps, u)
    return np.nextafter(v - u, -np.inf), np.nextafter(v + u, np.inf)


def _widened_pair(v: float, ulps: int = 4) -> tuple[float, float]:
    u = math.ulp(v) * ulps
    if v == 0.0:
        return -u, u
    return next_down(v - u), next_up(v + u)


def _close(a: float, b: float) -> bool:
    return a == b or abs(a - b) <= 1e-9 * max(abs(a), abs(b))


def _exact_powerlaw(c: float, s: float, n: int):
    """Exact value of c * n**(-s) as a Fraction, or a symbolic key when it
    is irrational."""
    if n == 1:
        return Fraction(c)
    fs = Fraction(s)
    num, den = fs.numerator, fs.denominator
    if den == 1:
        return Fraction(c) / Fraction(n) ** num
    if den <= 64:
        root = round(n ** (1.0 / den))
        for cand in (root - 1, root, root + 1):
            if cand > 0 and cand ** den == n:
                return Fraction(c) / Fraction(cand) ** num
    return ("powerlaw", c, s, n)


# -- tails ------------------------------------------------------------------

class Tail:
    """Closed-form coordinates for every index ``n >= start``."""

    kind = "abstract"

    @property
    def start(self) -> float:
        raise NotImplementedError

    @property
    def lower_domain(self) -> int:
        """Smallest index at which the formula is defined."""
        raise NotImplementedError

    def value(self, n: int) -> float:
        raise NotImplementedError

    def interval(self, n: int) -> Interval:
        raise NotImplementedError

    def bounds(self, n: int) -> tuple[float, float]:
        iv = self.interval(n)
        return iv.lo, iv.hi

    def bounds_array(self, ns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised ``bounds`` for indices ``ns``, all >= start."""
        pairs = [self.bounds(int(n)) for n in ns]
        return np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])

    def key(self, n: int):
        raise NotImplementedError

    def with_start(self, k: int) -> Tail:
        raise NotImplementedError

    def sup_abs(self) -> float:
        raise NotImplementedError

    def remainder(self, k: int, p: float) -> float:
        """Upper bound on sum_{n > k, n >= start} |coord_n|**p."""
        raise NotImplementedError

    def bracket(self, k: int, p: float) -> Interval:
        """Enclosure of sum_{n > k, n >= start} |coord_n|**p."""
        return Interval(0.0, self.remainder(k, p))

    def equals_at(self, n: int, v: float) -> bool:
        """Exact test: is the real coordinate at n equal to the double v?"""
        if not _close(self.value(n), v):
            return False
        return self.key(n) == Fraction(v)

    @property
    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class Zero(Tail):
    kind = "zero"

    @property
    def start(self) -> float:
        return math.inf

    @property
    def lower_domain(self) -> int:
        return 1

    def value(self, n: int) -> float:
        return 0.0

    def interval(self, n: int) -> Interval:
        return Interval(0.0, 0.0)

    def bounds_array(self, ns):
        z = np.zeros(len(ns))
        return z, z

    def key(self, n: int):
        return Fraction(0)

    def with_start(self, k: int) -> Tail:
        return self

    def sup_abs(self) -> float:
        return 0.0

    def remainder(self, k: int, p: float) -> float:
        return 0.0

    @property
    def is_zero(self) -> bool:
        return True


ZERO = Zero()


@dataclass(frozen=True)
class Geometric(Tail):
    """Coordinates ``c * r**(n - anchor)`` for ``n >= start``.

    ``anchor`` defaults to ``start``; it only differs after an overwrite has
    cut the front of the tail off.
    """

    c: float
    r: float
    start_: int = field(metadata={"json": "start"})
    anchor: int | None = None

    kind = "geometric"

    def __post_init__(self) -> None:
        c, r = float(self.c), float(self.r)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "r", r)
        if self.anchor is None:
            object.__setattr__(self, "anchor", self.start_)
        if not (math.isfinite(c) and math.isfinite(r)):
            raise ValueError("geometric tail parameters must be finite")
        if not abs(r) < 1.0:
            raise ValueError(f"geometric ratio must satisfy |r| < 1, got {r}")
        _check_index(self.start_)
        _check_index(self.anchor)

    @property
    def start(self) -> int:
        return self.start_

    @property
    def lower_domain(self) -> int:
        return 1 if self.r != 0.0 else self.anchor

    def value(self, n: int) -> float:
        return _rounded_geometric(self.c, self.r, n - self.anchor)

    def interval(self, n: int) -> Interval:
        return Interval(*self.bounds(n))

    def bounds(self, n: int) -> tuple[float, float]:
        v = self.c * self.r ** (n - self.anchor)
        if abs(v) >= 2.2250738585072014e-308 and _is_dyadic(self.r):
            return v, v
        return _widened_pair(v)

    def bounds_array(self, ns):
        v = self.c * np.power(self.r, (ns - self.anchor).astype(float))
        if _is_dyadic(self.r) and np.all(np.abs(v) >= 2.2250738585072014e-308):
            return v, v
        return _widened_arrays(v)

    def key(self, n: int):
        return Fraction(self.c) * Fraction(self.r) ** (n - self.anchor)

    def with_start(self, k: int) -> Tail:
        return Geometric(self.c, self.r, k, self.anchor)

    def sup_abs(self) -> float:
        v = abs(self.c) * abs(self.r) ** (self.start_ - self.anchor)
        return v * (1 + 1e-12) + 1e-300

    def remainder(self, k: int, p: float) -> float:
        return self.bracket(k, p).hi

    def bracket(self, k: int, p: float) -> Interval:
        m = max(k + 1, self.start_)
        rp, scale = _geometric_consts(abs(self.c), abs(self.r), p)
        return scale * _spow(rp, m - self.anchor)

    def canonical(self) -> Geometric:
        """Same sequence, anchored at the largest position <= start whose
        coordinate is an exact double."""
        fc, fr = Fraction(self.c), Fraction(self.r)
        for a in range(self.start_, max(1, self.start_ - 4096) - 1, -1):
            if a == self.anchor:
                return self
            exact = fc * fr ** (a - self.anchor)
            v = float(exact)
            if v != 0.0 and Fraction(v) == exact:
                return Geometric(v, self.r, self.start_, a)
        return self


@dataclass(frozen=True)
class PowerLaw(Tail):
    """Coordinates ``c * n**(-s)`` for ``n >= start`` (``s > 1``)."""

    c: float
    s: float
    start_: int = 1

    kind = "powerlaw"

    def __post_init__(self) -> None:
        c, s = float(self.c), float(self.s)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "s", s)
        if not (math.isfinite(c) and math.isfinite(s)):
            raise ValueError("power-law tail parameters must be finite")
        if not s > 1.0:
            raise ValueError(f"power-law exponent must exceed 1, got {s}")
        _check_index(self.start_)

    @property
    def start(self) -> int:
        return self.start_

    @property
    def lower_domain(self) -> int:
        return 1

    def value(self, n: int) -> float:
        return self.c * float(n) ** (-self.s)

    def interval(self, n: int) -> Interval:
        return Interval(*self.bounds(n))

    def bounds(self, n: int) -> tuple[float, float]:
        if n == 1:
            return self.c, self.c
        return _widened_pair(self.c * float(n) ** (-self.s))

    def bounds_array(self, ns):
        lo, hi = _widened_arrays(self.c * np.power(ns.astype(float), -self.s))
        one = ns == 1
        lo[one] = hi[one] = self.c
        return lo, hi

    def key(self, n: int):
        return _exact_powerlaw(self.c, self.s, n)

    def with_start(self, k: int) -> Tail:
        return PowerLaw(self.c, self.s, k)

    def sup_abs(self) -> float:
        return abs(self.c) * float(self.start_) ** (-self.s) * (1 + 1e-12) + 1e-300

    def remainder(self, k: int, p: float) -> float:
        return self.bracket(k, p).hi

    def bracket(self, k: int, p: float) -> Interval:
        m = max(k + 1, self.start_)
        q = Interval.point(self.s) * p
        cp = Interval.point(abs(self.c)).pow(p)
        head = Interval(0.0, 0.0)
        if m == 1:
            head, m = Interval(1.0, 1.0), 2
        return cp * (head + _zeta_tail(q, m))


@dataclass(frozen=True)
class Masked(Tail):
    """The inner tail restricted to the dyadic block ``T_block``."""

    inner: Tail
    block: int

    kind = "masked"

    def __post_init__(self) -> None:
        if isinstance(self.inner, (Masked, Projected)):
            raise ValueError("masked tails cannot nest")
        _check_index(self.block)

    @property
    def start(self) -> float:
        return self.inner.start

    @property
    def lower_domain(self) -> int:
        return self.inner.lower_domain

    def _in_block(self, n: int) -> bool:
        return dyadic_block(n) == self.block

    def value(self, n: int) -> float:
        return self.inner.value(n) if self._in_block(n) else 0.0

    def interval(self, n: int) -> Interval:
        return self.inner.interval(n) if self._in_block(n) else Interval(0.0, 0.0)

    def key(self, n: int):
        return self.inner.key(n) if self._in_block(n) else Fraction(0)

    def bounds_array(self, ns):
        lo, hi = self.inner.bounds_array(ns)
        blocks = np.log2((ns & -ns).astype(float)).astype(np.int64) + 1
        off = blocks != self.block
        lo, hi = lo.copy(), hi.copy()
        lo[off] = hi[off] = 0.0
        return lo, hi

    def with_start(self, k: int) -> Tail:
        return Masked(self.inner.with_start(k), self.block)

    def sup_abs(self) -> float:
        return self.inner.sup_abs()

    def remainder(self, k: int, p: float) -> float:
        return self.inner.remainder(k, p)

    @property
    def is_zero(self) -> bool:
        return self.inner.is_zero


@dataclass(frozen=True)
class Projected(Tail):
    """Relabelled tail ``m -> base(L(m))`` produced by block projections.

    ``L`` composes the dyadic block enumerations along ``path``.  Only
    membership tests and l_p bounds use it; overwrites raise
    :class:`Unrepresentable`.
    """

    base: Tail
    path: tuple[int, ...]
    start_: int

    kind = "projected"

    def flat(self, m: int) -> int:
        for b in reversed(self.path):
            m = dyadic_to_flat(b, m)
        return m

    @property
    def start(self) -> int:
        return self.start_

    @property
    def lower_domain(self) -> int:
        return self.start_

    def value(self, m: int) -> float:
        return self.base.value(self.flat(m))

    def interval(self, m: int) -> Interval:
        return self.base.interval(self.flat(m))

    def key(self, m: int):
        return self.base.key(self.flat(m))

    def with_start(self, k: int) -> Tail:
        raise Unrepresentable("projected tails cannot be cut or overwritten")

    def sup_abs(self) -> float:
        return self.base.sup_abs()

    def remainder(self, k: int, p: float) -> float:
        return self.base.remainder(self.flat(k) if k >= 1 else 0, p)


def _zeta_tail(q: Interval, m: int) -> Interval:
    """Enclosure of sum_{n >= m} n^(-q) for q > 1, m >= 2.

    Euler-Maclaurin for the completely monotone n^(-q): the sum lies
    between the expansions cut after the first and the third derivative.
    The terms are positive and evaluated in doubles; the relative margin
    covers the rounding of q*ln(m) inside exp and of q - 1.
    """
    fm_terms = []
    for qq in (q.lo, q.hi):
        fm = math.exp(-qq * math.log(m))
        integral = fm * m / (qq - 1.0)
        upper = integral + 0.5 * fm + qq * fm / (12.0 * m)
        t3 = qq * (qq + 1.0) * (qq + 2.0) * fm / (720.0 * m ** 3)
        rel = 1e-13 * (1.0 + qq * math.log(m)) + 1e-14 * qq / (qq - 1.0)
        fm_terms.append(((upper - t3) * (1.0 - rel), upper * (1.0 + rel)))
    # the sum is decreasing in q
    lo = max(0.0, next_down(fm_terms[1][0]))
    hi = next_up(fm_terms[0][1])
    return Interval(lo, hi)


@functools.lru_cache(maxsize=4096)
def _geometric_consts(c: float, r: float, p: float) -> tuple[Interval, Interval]:
    rp = Interval.point(r).pow(p)
    return rp, Interval.point(c).pow(p) / (1.0 - rp)


def _spow(base: Interval, k: int) -> Interval:
    return base.ipow(k) if k >= 0 else 1.0 / base.ipow(-k)


def _check_index(n) -> None:
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValueError(f"indices are positive integers, got {n!r}")


def _same_sequence(a: Tail, b: Tail) -> bool:
    """Do the two tail formulas define the same real sequence (ignoring
    where each is switched on)?  Distinct formulas differ infinitely often."""
    if type(a) is not type(b):
        return False
    if isinstance(a, Zero):
        return True
    if isinstance(a, Geometric):
        if a.r != b.r:
            return False
        if a.c == b.c and a.anchor == b.anchor:
            return True
        lo, hi = (a, b) if a.anchor <= b.anchor else (b, a)
        return Fraction(lo.c) * Fraction(lo.r) ** (hi.anchor - lo.anchor) == Fraction(hi.c)
    if isinstance(a, PowerLaw):
        return a.c == b.c and a.s == b.s
    if isinstance(a, Masked):
        return a.block == b.block and _same_sequence(a.inner, b.inner)
    if isinstance(a, Projected):
        return a.path == b.path and _same_sequence(a.base, b.base)
    return False


# -- points -----------------------------------------------------------------

@dataclass(frozen=True)
class SigmaOrder:
    """Number of differing coordinates; ``k is None`` means infinitely many."""

    k: int | None

    @property
    def is_finite(self) -> bool:
        return self.k is not None

    def __str__(self) -> str:
        return "Infinite" if self.k is None else f"Finite({self.k})"


INFINITE = SigmaOrder(None)


@dataclass(frozen=True)
class SeqPoint:
    explicit: tuple[tuple[int, float], ...] = ()
    tail: Tail = ZERO

    @cached_property
    def _map(self) -> dict[int, float]:
        return dict(self.explicit)

    @property
    def support_max(self) -> int:
        return self.explicit[-1][0] if self.explicit else 0

    @property
    def finite_support(self) -> bool:
        return self.tail.is_zero

    def __repr__(self) -> str:
        body = ", ".join(f"{n}: {v!r}" for n, v in self.explicit)
        if self.tail.is_zero:
            return f"SeqPoint({{{body}}})"
        return f"SeqPoint({{{body}}}, {self.tail!r})"


ZERO_POINT = SeqPoint()


def make_point(explicit: Iterable[tuple[int, float]] = (), tail: Tail = ZERO) -> SeqPoint:
    entries: dict[int, float] = {}
    for n, v in explicit:
        _check_index(n)
        if n in entries:
            raise ValueError(f"duplicate index {n}")
        v = float(v)
        if not math.isfinite(v):
            raise ValueError(f"coordinate {n} is not finite")
        entries[n] = v
    if not tail.is_zero:
        for n in entries:
            if n >= tail.start:
                raise ValueError(f"explicit index {n} is not below tail start {tail.start}")
    return _canonical(entries, tail)


def _normalise_tail(entries: dict[int, float], tail: Tail) -> Tail:
    if isinstance(tail, Geometric):
        if tail.c == 0.0:
            return ZERO
        if tail.r == 0.0:
            if tail.start == tail.anchor:
                entries[tail.start] = tail.c
            return ZERO
    elif isinstance(tail, PowerLaw):
        if tail.c == 0.0:
            return ZERO
    elif isinstance(tail, Masked):
        inner = _normalise_tail({}, tail.inner)
        if inner.is_zero:
            if isinstance(tail.inner, Geometric) and tail.inner.c != 0.0 and tail.inner.r == 0.0:
                n = tail.inner.start
                if tail.inner.start == tail.inner.anchor and dyadic_block(n) == tail.block:
                    entries[n] = tail.inner.c
            return ZERO
    return tail


def _canonical(entries: dict[int, float], tail: Tail) -> SeqPoint:
    tail = _normalise_tail(entries, tail)
    for n in [n for n, v in entries.items() if v == 0.0]:
        del entries[n]
    if not tail.is_zero and not isinstance(tail, Projected):
        while True:
            i = tail.start - 1
            if i < tail.lower_domain:
                break
            if not tail.equals_at(i, entries.get(i, 0.0)):
                break
            entries.pop(i, None)
            tail = tail.with_start(i)
        if isinstance(tail, Geometric):
            tail = tail.canonical()
        elif isinstance(tail, Masked) and isinstance(tail.inner, Geometric):
            tail = Masked(tail.inner.canonical(), tail.block)
    return SeqPoint(tuple(sorted(entries.items())), tail)


def zero_point() -> SeqPoint:
    return ZERO_POINT


def basis(n: int, scale: float = 1.0) -> SeqPoint:
    """``scale * e_n``."""
    return make_point([(n, scale)])


def _scaled_tail(t: Tail, lam: float) -> Tail:
    if isinstance(t, Zero):
        return t
    if isinstance(t, Geometric):
        return Geometric(t.c * lam, t.r, t.start, t.anchor)
    if isinstance(t, PowerLaw):
        return PowerLaw(t.c * lam, t.s, t.start)
    if isinstance(t, Masked):
        return Masked(_scaled_tail(t.inner, lam), t.block)
    raise Unrepresentable("projected tails cannot be rescaled")


def scaled(x: SeqPoint, lam: float) -> SeqPoint:
    """``lam * x`` with each stored double multiplied (and rounded) once."""
    lam = float(lam)
    if lam == 0.0:
        return ZERO_POINT
    return make_point([(n, v * lam) for n, v in x.explicit], _scaled_tail(x.tail, lam))


def coord(x: SeqPoint, n: int) -> float:
    v = x._map.get(n)
    if v is not None:
        return v
    if n >= x.tail.start:
        return x.tail.value(n)
    return 0.0


def _coord_bounds(x: SeqPoint, n: int) -> tuple[float, float]:
    v = x._map.get(n)
    if v is not None:
        return v, v
    if n >= x.tail.start:
        return x.tail.bounds(n)
    return 0.0, 0.0


def _accumulate(x: SeqPoint, y: SeqPoint, p: float, indices, lo: float, hi: float,
                unknown: bool = False) -> Interval:
    """Add enclosures of |x_n - y_n|^p over ``indices`` to ``[lo, hi]``
    using raw directed rounding (no intermediate Interval objects)."""
    ip = int(p) if float(p).is_integer() and p <= 64 else None
    for n in indices:
        alo, ahi = _coord_bounds(x, n)
        blo, bhi = _coord_bounds(y, n)
        dlo, dhi = sub_rd(alo, bhi), sub_ru(ahi, blo)
        if dlo >= 0.0:
            mlo, mhi = dlo, dhi
        elif dhi <= 0.0:
            mlo, mhi = -dhi, -dlo
        else:
            mlo, mhi = 0.0, max(-dlo, dhi)
        if mhi == 0.0:
            continue
        if ip == 1:
            tlo, thi = mlo, mhi
        elif ip == 2:
            tlo, thi = mul_rd(mlo, mlo), mul_ru(mhi, mhi)
        else:
            t = Interval(mlo, mhi).pow(p)
            tlo, thi = t.lo, t.hi
        lo, hi = add_rd(lo, tlo), add_ru(hi, thi)
    return Interval(lo, hi, unknown)


_U = 2.0 ** -53


def _accumulate_tails(x: SeqPoint, y: SeqPoint, p: float, first: int, last: int,
                      lo: float, hi: float, unknown: bool) -> Interval:
    """As ``_accumulate`` over ``first..last`` where neither point has
    explicit entries; vectorised, with an a-priori relative error bound."""
    ns = np.arange(first, last + 1, dtype=np.int64)
    parts = []
    for pt in (x, y):
        t = pt.tail
        if t.is_zero:
            z = np.zeros(len(ns))
            parts.append((z, z))
            continue
        on = ns >= t.start
        alo, ahi = np.zeros(len(ns)), np.zeros(len(ns))
        if np.any(on):
            blo, bhi = t.bounds_array(ns[on])
            alo[on], ahi[on] = blo, bhi
        parts.append((alo, ahi))
    (alo, ahi), (blo, bhi) = parts
    dlo, dhi = alo - bhi, ahi - blo
    mlo = np.where(dlo >= 0, dlo, np.where(dhi <= 0, -dhi, 0.0))
    mhi = np.maximum(np.abs(dlo), np.abs(dhi))
    if p == 1:
        tlo, thi = mlo, mhi
    elif p == 2:
        tlo, thi = mlo * mlo, mhi * mhi
    else:
        tlo, thi = np.power(mlo, p), np.power(mhi, p)
    # each term carries <= (2 + p) roundings relative, the sum <= len(ns)
    gamma = (len(ns) + 8 + 2 * p) * _U * 1.01
    slo = float(np.sum(tlo)) * (1.0 - gamma)
    shi = float(np.sum(thi)) * (1.0 + gamma)
    return Interval(add_rd(lo, max(0.0, next_down(slo))), add_ru(hi, next_up(shi)), unknown)


def coord_interval(x: SeqPoint, n: int) -> Interval:
    v = x._map.get(n)
    if v is not None:
        return Interval(v, v)
    if n >= x.tail.start:
        return x.tail.interval(n)
    return Interval(0.0, 0.0)


def _coords_equal(x: SeqPoint, y: SeqPoint, n: int) -> bool:
    vx, vy = x._map.get(n), y._map.get(n)
    tx = vx is None and n >= x.tail.start
    ty = vy is None and n >= y.tail.start
    if not tx and not ty:
        return (vx or 0.0) == (vy or 0.0)
    if tx and ty:
        if not _close(x.tail.value(n), y.tail.value(n)):
            return False
        return x.tail.key(n) == y.tail.key(n)
    if tx:
        return x.tail.equals_at(n, vy or 0.0)
    return y.tail.equals_at(n, vx or 0.0)


def set_coord(x: SeqPoint, n: int, v: float) -> SeqPoint:
    """The point equal to ``x`` except coordinate ``n``, which becomes ``v``.

    Writing at or beyond the tail start materialises the tail values in
    between as explicit doubles.
    """
    _check_index(n)
    v = float(v)
    if not math.isfinite(v):
        raise ValueError("coordinate values must be finite")
    entries = dict(x.explicit)
    tail = x.tail
    if not tail.is_zero and n >= tail.start:
        if isinstance(tail, Projected):
            raise Unrepresentable("cannot overwrite a projected tail")
        for i in range(tail.start, n):
            tv = tail.value(i)
            if tv != 0.0:
                entries[i] = tv
        tail = tail.with_start(n + 1)
    entries[n] = v
    return _canonical(entries, tail)


def set_coords(x: SeqPoint, values: dict[int, float]) -> SeqPoint:
    for n in sorted(values, reverse=True):
        x = set_coord(x, n, values[n])
    return x


def overwrite(x: SeqPoint, t: int, a: SeqPoint) -> SeqPoint:
    """``x_t^a``: x with its t-th coordinate replaced by a's."""
    if _coords_equal(x, a, t):
        return x
    tx, ta = x.tail, a.tail
    if (t == tx.start - 1 and t not in a._map and t >= ta.start and not tx.is_zero
            and not isinstance(tx, Projected) and _same_sequence(tx, ta) and t >= tx.lower_domain):
        # a's value is the exact tail value, so extend the tail down instead
        entries = dict(x.explicit)
        entries.pop(t, None)
        return _canonical(entries, tx.with_start(t))
    return set_coord(x, t, coord(a, t))


def _window_indices(x: SeqPoint, y: SeqPoint, upto: float) -> list[int]:
    """Indices below ``upto`` where x or y may be nonzero."""
    idx = set(x._map) | set(y._map)
    for pt in (x, y):
        s = pt.tail.start
        if s < upto:
            idx.update(range(int(s), int(upto)))
    return sorted(i for i in idx if i < upto)


def sigma_order(x: SeqPoint, a: SeqPoint) -> SigmaOrder:
    if not _same_sequence(x.tail, a.tail):
        return INFINITE
    upto = max(x.support_max, a.support_max) + 1
    finite_starts = [s for s in (x.tail.start, a.tail.start) if s != math.inf]
    if finite_starts:
        upto = max(upto, max(finite_starts))
    count = sum(1 for n in _window_indices(x, a, upto) if not _coords_equal(x, a, n))
    return SigmaOrder(count)


def project(x: SeqPoint, block: int, scheme) -> SeqPoint:
    """Coordinates of x on the block ``T_block``, relabelled to 1, 2, ..."""
    _check_index(block)
    entries = {}
    for n, v in x.explicit:
        b, m = scheme.from_flat(n)
        if b == block:
            entries[m] = v
    tail = x.tail
    if tail.is_zero:
        return SeqPoint(tuple(sorted(entries.items())), ZERO)
    if getattr(scheme, "name", None) != "dyadic":
        raise Unrepresentable("tails can only be projected through the dyadic scheme")
    if isinstance(tail, Masked):
        if tail.block != block:
            return SeqPoint(tuple(sorted(entries.items())), ZERO)
        new_tail = _relabel_geometric(tail.inner, block)
        if new_tail is None:
            new_tail = _projected(tail.inner, (block,))
    elif isinstance(tail, Projected):
        new_tail = _projected(tail.base, tail.path + (block,))
    else:
        new_tail = _projected(tail, (block,))
    return SeqPoint(tuple(sorted(entries.items())), new_tail)


def _projected(base: Tail, path: tuple[int, ...]) -> Projected:
    probe = Projected(base, path, 1)
    lo, hi = 1, 1
    while probe.flat(hi) < base.start:
        lo, hi = hi, hi * 2
    while hi > lo:
        mid = (lo + hi) // 2
        if probe.flat(mid) >= base.start:
            hi = mid
        else:
            lo = mid + 1
    return Projected(base, path, hi)


def _relabel_geometric(inner: Tail, block: int) -> Tail | None:
    if not isinstance(inner, Geometric):
        return None
    m_anchor = _first_position_at_least(dyadic_to_flat, block, inner.anchor)
    m_start = _first_position_at_least(dyadic_to_flat, block, inner.start)
    shift = dyadic_to_flat(block, m_anchor) - inner.anchor
    c2 = inner.c * inner.r ** shift
    r2 = inner.r ** (1 << block)
    fr = Fraction(inner.r)
    if r2 == 0.0 or c2 == 0.0:
        return None
    if Fraction(r2) != fr ** (1 << block) or Fraction(c2) != Fraction(inner.c) * fr ** shift:
        return None
    return Geometric(c2, r2, m_start, m_anchor)


# -- l_p geometry -------------------------------------------------------------

def _check_p(p: float) -> None:
    if not (math.isfinite(p) and p >= 1):
        raise ValueError(f"p must be a finite real >= 1, got {p}")


def _geom_view(t: Tail):
    if isinstance(t, Geometric):
        return (None, t)
    if isinstance(t, Masked) and isinstance(t.inner, Geometric):
        return (t.block, t.inner)
    return None


def _far_geometric(tx: Tail, ty: Tail):
    """If x - y is geometric on every index nobody overrides, return
    ``(coef, anchor, r, block)`` describing it."""
    vx = None if tx.is_zero else _geom_view(tx)
    vy = None if ty.is_zero else _geom_view(ty)
    if (vx is None and not tx.is_zero) or (vy is None and not ty.is_zero):
        return None
    if vx is None and vy is None:
        return None
    if vx is None or vy is None:
        block, g = vx if vx is not None else vy
        sign = 1.0 if vx is not None else -1.0
        return Interval.point(sign * g.c), g.anchor, g.r, block
    (bx, gx), (by, gy) = vx, vy
    if bx != by or gx.r != gy.r:
        return None
    r = gx.r
    A = max(gx.anchor, gy.anchor)
    rr = Interval.point(abs(r))

    def scaled(g: Geometric) -> Interval:
        k = A - g.anchor
        mag = rr.ipow(k)
        if r < 0 and k % 2:
            mag = -mag
        return mag * g.c

    return scaled(gx) - scaled(gy), A, r, bx


def _window_sum(x: SeqPoint, y: SeqPoint, p: float, upto: float) -> Interval:
    return _accumulate(x, y, p, _window_indices(x, y, upto), 0.0, 0.0)


def _window_limit(x: SeqPoint, y: SeqPoint) -> float:
    upto = max(x.support_max, y.support_max) + 1
    starts = [s for s in (x.tail.start, y.tail.start) if s != math.inf]
    if starts:
        upto = max(upto, max(starts))
    return upto


def dist_p(x: SeqPoint, y: SeqPoint, p: float, depth: int = DEFAULT_DEPTH) -> Interval:
    """Certified enclosure of ``||x - y||_p``.

    Closed forms are used when the far part of ``x - y`` is identically zero
    or geometric; otherwise the sum is truncated at ``depth`` (raised to the
    largest explicit index if needed) and the tails beyond are bounded with
    Minkowski's inequality.  Enclosures are nested in ``depth``.
    """
    _check_p(p)
    tx, ty = x.tail, y.tail
    if _same_sequence(tx, ty):
        upto = _window_limit(x, y)
        return _window_sum(x, y, p, upto).root(p)
    far = _far_geometric(tx, ty)
    if far is not None:
        try:
            return _geometric_split(x, y, p, far)
        except ZeroDivisionError:
            pass
    return _truncated(x, y, p, depth)


def _geometric_split(x: SeqPoint, y: SeqPoint, p: float, far) -> Interval:
    coef, anchor, r, block = far
    upto = _window_limit(x, y)
    W = int(upto)
    window = _window_sum(x, y, p, upto)
    rp = Interval.point(abs(r)).pow(p)
    cp = abs(coef).pow(p)
    if block is None:
        tail_sum = cp * _spow(rp, W - anchor) / (1.0 - rp)
    else:
        m0 = _first_position_at_least(dyadic_to_flat, block, W)
        n0 = dyadic_to_flat(block, m0)
        tail_sum = cp * _spow(rp, n0 - anchor) / (1.0 - rp.ipow(1 << block))
    return (window + tail_sum).root(p)


def _cut_points(k0: int, depth: int) -> list[int]:
    # powers of eight only, so the cut set for a smaller depth is contained
    # in the one for a larger depth and enclosures nest
    target = max(depth, k0, 1)
    top = 1
    while top < target:
        top <<= 3
    pts = {k0, top}
    b = 1
    while b < top:
        if b >= k0:
            pts.add(b)
        b <<= 3
    return sorted(pts)


def _truncated(x: SeqPoint, y: SeqPoint, p: float, depth: int) -> Interval:
    k0 = max(x.support_max, y.support_max)
    total = _window_sum(x, y, p, k0 + 1)
    lo, hi = -math.inf, math.inf
    unknown = total.unknown
    k = k0
    for cut in _cut_points(k0, depth):
        if k < cut:
            if cut - k >= 16 and not isinstance(x.tail, Projected) and not isinstance(y.tail, Projected):
                total = _accumulate_tails(x, y, p, k + 1, cut, total.lo, total.hi, unknown)
            else:
                total = _accumulate(x, y, p, range(k + 1, cut + 1), total.lo, total.hi, unknown)
            k = cut
        if y.tail.is_zero or x.tail.is_zero:
            far = x.tail.bracket(k, p) if y.tail.is_zero else y.tail.bracket(k, p)
            enc = (total + far).root(p)
        else:
            # split the difference as (head, x tail) - (0, y tail) and back
            bx, by = x.tail.bracket(k, p), y.tail.bracket(k, p)
            rx = Interval(0.0, bx.hi).root(p).hi
            ry = Interval(0.0, by.hi).root(p).hi
            ux, uy = (total + bx).root(p), (total + by).root(p)
            enc_lo = max(total.root(p).lo, sub_rd(ux.lo, ry), sub_rd(uy.lo, rx))
            enc_hi = min(add_ru(ux.hi, ry), add_ru(uy.hi, rx))
            enc = Interval(max(enc_lo, 0.0), enc_hi)
        lo = max(lo, enc.lo)
        hi = min(hi, enc.hi)
    return Interval(lo, hi, unknown)


def p_norm(x: SeqPoint, p: float, depth: int = DEFAULT_DEPTH) -> Interval:
    return dist_p(x, ZERO_POINT, p, depth)


def dist_trunc(x: SeqPoint, y: SeqPoint, p: float, depth: int = DEFAULT_DEPTH) -> Interval:
    """The bounded metric ``min{d_p, 1}``."""
    return imin(dist_p(x, y, p, depth), 1.0)


def l1_sum(x: SeqPoint) -> Interval:
    """Certified ``sum |x_n|`` for a finite-support point."""
    if not x.tail.is_zero:
        raise Unrepresentable("l1 sum over explicit coordinates needs a zero tail")
    return isum(abs(Interval(v, v)) for _, v in x.explicit)


# -- serialisation ------------------------------------------------------------

def tail_to_json(t: Tail) -> dict:
    if isinstance(t, Zero):
        return {"kind": "zero"}
    if isinstance(t, Geometric):
        d = {"kind": "geometric", "c": t.c, "r": t.r, "start": t.start}
        if t.anchor != t.start:
            d["anchor"] = t.anchor
        return d
    if isinstance(t, PowerLaw):
        return {"kind": "powerlaw", "c": t.c, "s": t.s, "start": t.start}
    if isinstance(t, Masked):
        return {"kind": "masked", "inner": tail_to_json(t.inner), "block": t.block}
    if isinstance(t, Projected):
        return {"kind": "projected", "base": tail_to_json(t.base),
                "path": list(t.path), "start": t.start}
    raise TypeError(f"unknown tail {t!r}")


def tail_from_json(d: dict) -> Tail:
    kind = d.get("kind")
    if kind == "zero":
        return ZERO
    if kind == "geometric":
        return Geometric(d["c"], d["r"], d.get("start", 1), d.get("anchor"))
    if kind == "powerlaw":
        return PowerLaw(d["c"], d["s"], d.get("start", 1))
    if kind == "masked":
        return Masked(tail_from_json(d["inner"]), d["block"])
    if kind == "projected":
        return Projected(tail_from_json(d["base"]), tuple(d["path"]), d["start"])
    raise ValueError(f"unknown tail kind {kind!r}")


def point_to_json(x: SeqPoint) -> dict:
    return {"explicit": [[n, v] for n, v in x.explicit], "tail": tail_to_json(x.tail)}


def point_from_json(d: dict) -> SeqPoint:
    tail = tail_from_json(d.get("tail", {"kind": "zero"}))
    entries = [(int(n), float(v)) for n, v in d.get("explicit", [])]
    if isinstance(tail, Projected):
        return SeqPoint(tuple(sorted(entries)), tail)
    return make_point(entries, tail)


def dumps_point(x: SeqPoint) -> str:
    return json.dumps(point_to_json(x), sort_keys=True)


def loads_point(s: str) -> SeqPoint:
    return point_from_json(json.loads(s))
