"""Three-valued verdicts and check reports."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any

from .interval import Interval


@dataclass(frozen=True)
class Verdict:
    """``True``, ``False`` or ``Unknown(reason)``.

    Deliberately not usable as a bool: callers must say which outcome they
    are testing for.
    """

    value: bool | None
    reason: str = ""

    @classmethod
    def true(cls) -> Verdict:
        return _TRUE

    @classmethod
    def false(cls, reason: str = "") -> Verdict:
        return cls(False, reason) if reason else _FALSE

    @classmethod
    def unknown(cls, reason: str) -> Verdict:
        return cls(None, reason)

    @classmethod
    def of(cls, flag: bool) -> Verdict:
        return _TRUE if flag else _FALSE

    @property
    def is_true(self) -> bool:
        return self.value is True

    @property
    def is_false(self) -> bool:
        return self.value is False

    @property
    def is_unknown(self) -> bool:
        return self.value is None

    @property
    def decided(self) -> bool:
        return self.value is not None

    def negate(self) -> Verdict:
        if self.value is None:
            return self
        return Verdict.of(not self.value)

    def __bool__(self) -> bool:
        raise TypeError("Verdict is three-valued; use .is_true / .is_false")

    @property
    def label(self) -> str:
        return {True: "true", False: "false", None: "unknown"}[self.value]

    def __str__(self) -> str:
        if self.value is None:
            return f"unknown({self.reason})"
        return self.label


_TRUE = Verdict(True)
_FALSE = Verdict(False)


@dataclass(frozen=True)
class RadiusRecord:
    radius: float
    sup_gap: Interval
    n_samples: int


@dataclass
class CheckReport:
    verdict: Verdict
    per_radius: list[RadiusRecord] = field(default_factory=list)
    witnesses: list[Any] = field(default_factory=list)
    notes: str = ""

    def to_dict(self) -> dict:
        from .seqpoint import point_to_json

        return {
            "verdict": self.verdict.label,
            "reason": self.verdict.reason,
            "per_radius": [
                {"radius": r.radius, "sup_gap_lo": r.sup_gap.lo,
                 "sup_gap_hi": r.sup_gap.hi, "n_samples": r.n_samples}
                for r in self.per_radius
            ],
            "witnesses": [point_to_json(w) for w in self.witnesses],
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "sup_gap_lo", "sup_gap_hi", "n_samples"])
        for r in self.per_radius:
            w.writerow([repr(r.radius), repr(r.sup_gap.lo), repr(r.sup_gap.hi), r.n_samples])
        return buf.getvalue()
