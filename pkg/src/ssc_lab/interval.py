"""Closed real intervals with outward-rounded double endpoints.

Endpoints are widened only when a primitive operation is inexact.  Exactness
of sums, products, quotients and square roots is detected with error-free
transformations (TwoSum, Dekker's TwoProduct), so exact inputs such as
``3*3 + 4*4`` stay degenerate intervals.  Transcendental functions are
widened by a few units in the last place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

_INF = math.inf
_SPLIT = 134217729.0  # 2**27 + 1
_TINY = 1e-290
_HUGE = 1e290


def next_down(v: float) -> float:
    return math.nextafter(v, -_INF)


def next_up(v: float) -> float:
    return math.nextafter(v, _INF)


def _down(v: float, k: int) -> float:
    for _ in range(k):
        v = math.nextafter(v, -_INF)
    return v


def _up(v: float, k: int) -> float:
    for _ in range(k):
        v = math.nextafter(v, _INF)
    return v


def two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple[float, float]:
    t = _SPLIT * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a: float, b: float) -> tuple[float, float | None]:
    """Return ``(p, err)`` with ``a*b = p + err`` exactly, or ``err=None``
    when the error term cannot be trusted (over/underflow ranges)."""
    p = a * b
    if p == 0.0:
        return p, (0.0 if a == 0.0 or b == 0.0 else None)
    if not (_TINY <= abs(p) <= _HUGE) or abs(a) > _HUGE or abs(b) > _HUGE:
        return p, None
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def add_rd(a: float, b: float) -> float:
    s, e = two_sum(a, b)
    return next_down(s) if e < 0 else s


def add_ru(a: float, b: float) -> float:
    s, e = two_sum(a, b)
    return next_up(s) if e > 0 else s


def sub_rd(a: float, b: float) -> float:
    return add_rd(a, -b)


def sub_ru(a: float, b: float) -> float:
    return add_ru(a, -b)


def mul_rd(a: float, b: float) -> float:
    p, e = two_prod(a, b)
    if e is None:
        return next_down(p)
    return next_down(p) if e < 0 else p


def mul_ru(a: float, b: float) -> float:
    p, e = two_prod(a, b)
    if e is None:
        return next_up(p)
    return next_up(p) if e > 0 else p


def _div_direction(a: float, b: float) -> tuple[float, int]:
    # sign of (a/b - q) where q = fl(a/b); None-safe fallback reports 2
    q = a / b
    p, e = two_prod(q, b)
    if e is None:
        return q, 2
    r = (a - p) - e
    if r == 0.0:
        return q, 0
    return q, 1 if (r > 0) == (b > 0) else -1


def div_rd(a: float, b: float) -> float:
    q, d = _div_direction(a, b)
    return next_down(q) if d in (-1, 2) else q


def div_ru(a: float, b: float) -> float:
    q, d = _div_direction(a, b)
    return next_up(q) if d in (1, 2) else q


def _sqrt_direction(x: float) -> tuple[float, int]:
    s = math.sqrt(x)
    if s == 0.0:
        return s, 0
    p, e = two_prod(s, s)
    if e is None:
        return s, 2
    d = (p - x) + e
    if d == 0.0:
        return s, 0
    return s, -1 if d > 0 else 1


def sqrt_rd(x: float) -> float:
    s, d = _sqrt_direction(x)
    return max(0.0, next_down(s)) if d in (-1, 2) else s


def sqrt_ru(x: float) -> float:
    s, d = _sqrt_direction(x)
    return next_up(s) if d in (1, 2) else s


Number = Union[int, float]


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]``.

    ``unknown`` marks enclosures that came from an undecided classification;
    the flag propagates through arithmetic.
    """

    lo: float
    hi: float
    unknown: bool = False

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        # normalise -0.0 so serialisation is canonical
        object.__setattr__(self, "lo", lo + 0.0)
        object.__setattr__(self, "hi", hi + 0.0)

    @classmethod
    def point(cls, v: Number) -> Interval:
        return cls(v, v)

    # -- inspection -------------------------------------------------------
    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, v: Number) -> bool:
        return self.lo <= v <= self.hi

    def within(self, other: Interval) -> bool:
        """True when ``self`` is a subset of ``other``."""
        return other.lo <= self.lo and self.hi <= other.hi

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: Interval | Number) -> Interval:
        o = as_interval(other)
        return Interval(add_rd(self.lo, o.lo), add_ru(self.hi, o.hi),
                        self.unknown or o.unknown)

    __radd__ = __add__

    def __sub__(self, other: Interval | Number) -> Interval:
        o = as_interval(other)
        return Interval(sub_rd(self.lo, o.hi), sub_ru(self.hi, o.lo),
                        self.unknown or o.unknown)

    def __rsub__(self, other: Number) -> Interval:
        return as_interval(other) - self

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo, self.unknown)

    def __mul__(self, other: Interval | Number) -> Interval:
        o = as_interval(other)
        unk = self.unknown or o.unknown
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        if a >= 0.0 and c >= 0.0:
            return Interval(mul_rd(a, c), mul_ru(b, d), unk)
        lo = min(mul_rd(a, c), mul_rd(a, d), mul_rd(b, c), mul_rd(b, d))
        hi = max(mul_ru(a, c), mul_ru(a, d), mul_ru(b, c), mul_ru(b, d))
        return Interval(lo, hi, unk)

    __rmul__ = __mul__

    def __truediv__(self, other: Interval | Number) -> Interval:
        o = as_interval(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError(f"divisor {o} contains zero")
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        lo = min(div_rd(a, c), div_rd(a, d), div_rd(b, c), div_rd(b, d))
        hi = max(div_ru(a, c), div_ru(a, d), div_ru(b, c), div_ru(b, d))
        return Interval(lo, hi, self.unknown or o.unknown)

    def __rtruediv__(self, other: Number) -> Interval:
        return as_interval(other) / self

    def __abs__(self) -> Interval:
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi), self.unknown)

    def square(self) -> Interval:
        a = abs(self)
        return Interval(mul_rd(a.lo, a.lo), mul_ru(a.hi, a.hi), self.unknown)

    def sqrt(self) -> Interval:
        if self.lo < 0.0:
            raise ValueError(f"sqrt of {self}")
        return Interval(sqrt_rd(self.lo), sqrt_ru(self.hi), self.unknown)

    def ipow(self, k: int) -> Interval:
        """Integer power of a nonnegative interval by repeated squaring."""
        if self.lo < 0.0:
            raise ValueError("ipow needs a nonnegative interval")
        lo, hi = 1.0, 1.0
        blo, bhi = self.lo, self.hi
        while k > 0:
            if k & 1:
                lo, hi = mul_rd(lo, blo), mul_ru(hi, bhi)
            k >>= 1
            if k:
                blo, bhi = mul_rd(blo, blo), mul_ru(bhi, bhi)
        return Interval(max(lo, 0.0), hi, self.unknown)

    def pow(self, p: float) -> Interval:
        """``x**p`` for a nonnegative interval and real ``p >= 1``."""
        if self.lo < 0.0:
            raise ValueError(f"pow of {self}")
        if p == 1:
            return self
        if p == 2:
            return self.square()
        if float(p).is_integer() and p <= 64:
            return self.ipow(int(p))
        return Interval(_pow_down(self.lo, p), _pow_up(self.hi, p), self.unknown)

    def root(self, p: float) -> Interval:
        """``x**(1/p)`` for a nonnegative interval."""
        if self.lo < 0.0:
            raise ValueError(f"root of {self}")
        if p == 1:
            return self
        if p == 2:
            return self.sqrt()
        return Interval(_root_down(self.lo, p), _root_up(self.hi, p), self.unknown)

    def exp(self) -> Interval:
        lo = 1.0 if self.lo == 0.0 else max(0.0, _down(math.exp(self.lo), 2))
        hi = 1.0 if self.hi == 0.0 else _up(math.exp(self.hi), 2)
        return Interval(lo, hi, self.unknown)

    def log(self) -> Interval:
        if self.lo <= 0.0:
            raise ValueError(f"log of {self}")
        lo = 0.0 if self.lo == 1.0 else _down(math.log(self.lo), 2)
        hi = 0.0 if self.hi == 1.0 else _up(math.log(self.hi), 2)
        return Interval(lo, hi, self.unknown)

    def __repr__(self) -> str:
        tag = ", unknown" if self.unknown else ""
        return f"Interval({self.lo!r}, {self.hi!r}{tag})"


def as_interval(v: Interval | Number) -> Interval:
    if isinstance(v, Interval):
        return v
    return Interval(v, v)


def imin(a: Interval, b: Interval | Number) -> Interval:
    b = as_interval(b)
    return Interval(min(a.lo, b.lo), min(a.hi, b.hi), a.unknown or b.unknown)


def imax(a: Interval, b: Interval | Number) -> Interval:
    b = as_interval(b)
    return Interval(max(a.lo, b.lo), max(a.hi, b.hi), a.unknown or b.unknown)


def hull(a: Interval, b: Interval) -> Interval:
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi), a.unknown or b.unknown)


def isum(terms) -> Interval:
    lo = hi = 0.0
    unk = False
    for t in terms:
        lo = add_rd(lo, t.lo)
        hi = add_ru(hi, t.hi)
        unk = unk or t.unknown
    return Interval(lo, hi, unk)


def _pow_down(v: float, p: float) -> float:
    if v == 0.0 or v == 1.0:
        return v
    return max(0.0, _down(v ** p, 3))


def _pow_up(v: float, p: float) -> float:
    if v == 0.0 or v == 1.0:
        return v
    return _up(v ** p, 3)


def _root_slack(v: float, p: float) -> int:
    # 1/p is itself rounded: relative error grows like |ln v| * 2**-53
    return 4 + int(abs(math.log(v)) / p) + 1


def _root_down(v: float, p: float) -> float:
    if v == 0.0 or v == 1.0:
        return v
    return max(0.0, _down(v ** (1.0 / p), _root_slack(v, p)))


def _root_up(v: float, p: float) -> float:
    if v == 0.0 or v == 1.0:
        return v
    return _up(v ** (1.0 / p), _root_slack(v, p))
