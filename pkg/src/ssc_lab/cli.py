"""Batch runner: JSON experiment configs in, CSV/JSON/SVG reports out.

Exit status: 0 when every check came out as the config expects (True by
default), 2 when a decided verdict contradicts the expectation, 3 when a
check stayed Unknown, 1 for configuration errors (reported as JSON on
stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .borel import (
    ClassIndex,
    class_is_s_open_check,
    class_membership,
    closed_ball,
    contracting_image,
    coordinate_zero_set,
    fixed_point,
    baire2_iterated_limit,
)
from .errors import NoConvergence, SSCLabError
from .outcome import CheckReport, Verdict
from .sampling import random_point, random_point_with_norm, rng_for
from .seqpoint import (
    DEFAULT_DEPTH,
    ZERO_POINT,
    dist_p,
    dist_trunc,
    point_from_json,
    point_to_json,
)
from .sscfun import (
    Ball,
    evaluate,
    example_x,
    example_y,
    func_from_json,
    prescribed_discontinuity_fn,
    region_from_json,
)
from .svgplot import gap_plot
from .verify import (
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

DEMO_SEED = 0xC0FFEE
KINDS = ("ssc_check", "continuity", "witness", "modulus", "contraction",
         "borel_parity", "baire2", "determining")


class ConfigError(Exception):
    pass


# -- schemas ------------------------------------------------------------------------

_POINT = {
    "type": "object",
    "properties": {
        "explicit": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2}},
        "tail": {"type": "object", "required": ["kind"]},
    },
    "additionalProperties": False,
}
_SAMPLE = {
    "type": "object",
    "required": ["count", "norm"],
    "properties": {
        "count": {"type": "integer", "minimum": 0},
        "norm": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2, "maxItems": 2},
        "p": {"type": "number", "minimum": 1},
        "kinds": {"type": "array", "items": {"enum": ["finite", "geometric", "powerlaw", "masked"]}},
    },
    "additionalProperties": False,
}
_SCHEDULE = {
    "type": "object",
    "properties": {
        "j_max": {"type": "integer", "minimum": 0},
        "step": {"type": "integer", "minimum": 1},
        "radii": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "samples": {"type": "integer", "minimum": 0},
        "style": {"enum": ["coordinate", "random_direction", "pointwise_escape"]},
    },
    "additionalProperties": False,
}
_TOPOLOGY = {
    "type": "object",
    "required": ["kind"],
    "properties": {"kind": {"enum": ["norm", "pointwise"]}, "p": {"type": "number", "minimum": 1}},
    "additionalProperties": False,
}
_EXPECT = {"enum": ["true", "false", "unknown"]}
_REGION = {"type": "object", "required": ["kind"]}
_CASE = {
    "type": "object",
    "required": ["topology"],
    "properties": {
        "label": {"type": "string"},
        "point": _POINT,
        "points": {"type": "array", "items": _POINT},
        "sample": _SAMPLE,
        "t": {"type": "integer", "minimum": 1},
        "ts": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "topology": _TOPOLOGY,
        "schedule": _SCHEDULE,
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "min_gap": {"type": "number"},
        "expect": _EXPECT,
    },
    "additionalProperties": False,
}
_CHECKS = {
    "type": "object",
    "required": ["sample"],
    "properties": {
        "sample": _SAMPLE,
        "ts": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "schedule": _SCHEDULE,
        "tol": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}
_MODULUS_ITEM = {
    "type": "object",
    "required": ["k", "eps"],
    "properties": {
        "point": _POINT,
        "k": {"type": "integer", "minimum": 1},
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "expected": {"type": "number"},
    },
    "additionalProperties": False,
}

_COMMON = {"seed": {"type": "integer"}, "depth": {"type": "integer", "minimum": 1}}

PARAM_SCHEMAS = {
    "ssc_check": {
        "required": ["seed", "function", "cases"],
        "properties": {
            **_COMMON,
            "function": {"type": "object", "required": ["kind"]},
            "cases": {"type": "array", "items": _CASE, "minItems": 1},
            "families": {"type": "object", "required": ["from", "to"],
                         "properties": {"from": {"type": "integer", "minimum": 2},
                                        "to": {"type": "integer", "minimum": 2}},
                         "additionalProperties": False},
        },
    },
    "continuity": {
        "required": ["seed", "function", "cases"],
        "properties": {
            **_COMMON,
            "function": {"type": "object", "required": ["kind"]},
            "cases": {"type": "array", "items": _CASE, "minItems": 1},
        },
    },
    "witness": {
        "required": ["seed", "region", "p", "delta"],
        "properties": {
            **_COMMON,
            "region": _REGION,
            "p": {"type": "number", "minimum": 1},
            "delta": {"type": "number", "exclusiveMinimum": 0},
            "points": {"type": "array", "items": _POINT},
            "sample": _SAMPLE,
            "controls": _CHECKS,
            "ssc": _CHECKS,
            "moduli": {"type": "array", "items": _MODULUS_ITEM},
            "infeasible": {"type": "array", "items": {
                "type": "object", "required": ["p"],
                "properties": {"p": {"type": "number", "minimum": 1}, "point": _POINT},
                "additionalProperties": False}},
            "expect": _EXPECT,
        },
    },
    "modulus": {
        "required": ["seed", "region", "p", "k", "eps"],
        "properties": {
            **_COMMON,
            "region": _REGION,
            "p": {"type": "number", "minimum": 1},
            "point": _POINT,
            "k": {"type": "integer", "minimum": 1},
            "eps": {"type": "number", "exclusiveMinimum": 0},
            "expected": {"type": "number"},
        },
    },
    "contraction": {
        "required": ["seed", "chain", "p", "pairs"],
        "properties": {
            **_COMMON,
            "chain": {"type": "array", "minItems": 1, "items": {
                "type": "object", "required": ["radius"],
                "properties": {"center": _POINT, "radius": {"type": "number", "exclusiveMinimum": 0}},
                "additionalProperties": False}},
            "p": {"type": "number", "minimum": 1},
            "pairs": {"type": "integer", "minimum": 0},
            "bound": {"type": "number", "exclusiveMinimum": 0},
            "fixed_point": {"type": "object", "properties": {
                "start": _POINT, "tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 0}}, "additionalProperties": False},
            "preimage_points": {"type": "integer", "minimum": 0},
        },
    },
    "borel_parity": {
        "required": ["seed"],
        "properties": {
            **_COMMON,
            "alphas": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
            "finite_points": {"type": "integer", "minimum": 0},
            "geometric_points": {"type": "integer", "minimum": 0},
            "s_open_alphas": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            "s_open_samples": {"type": "integer", "minimum": 0},
        },
    },
    "baire2": {
        "required": ["seed", "points"],
        "properties": {
            **_COMMON,
            "points": {"type": "integer", "minimum": 0},
            "kinds": {"type": "array", "items": {"enum": ["finite", "geometric"]}, "minItems": 1},
        },
    },
    "determining": {
        "required": ["seed", "coordinate", "box"],
        "properties": {
            **_COMMON,
            "coordinate": {"type": "integer", "minimum": 1},
            "box": {"type": "object", "patternProperties": {
                "^[1-9][0-9]*$": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}},
                "additionalProperties": False, "minProperties": 1},
            "base": _POINT,
            "samples": {"type": "integer", "minimum": 0},
            "budget": {"type": "integer", "minimum": 0},
        },
    },
}
for _s in PARAM_SCHEMAS.values():
    _s["type"] = "object"
    _s["additionalProperties"] = False

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["name", "kind", "params"],
    "properties": {
        "name": {"type": "string"},
        "kind": {"enum": list(KINDS)},
        "params": {"type": "object"},
        "outputs": {"type": "array", "items": {
            "type": "object", "required": ["format", "path"],
            "properties": {"format": {"enum": ["csv", "json", "svg"]}, "path": {"type": "string"}},
            "additionalProperties": False}},
    },
    "additionalProperties": False,
}


def validate(cfg) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
        jsonschema.validate(cfg["params"], PARAM_SCHEMAS[cfg["kind"]])
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path)
        raise ConfigError(f"{where or '<root>'}: {e.message}") from None
    if any(o["format"] == "svg" for o in cfg.get("outputs", [])) and cfg["kind"] not in (
            "ssc_check", "continuity", "witness"):
        raise ConfigError(f"svg output needs gap-vs-radius data, which {cfg['kind']} does not produce")


# -- results ---------------------------------------------------------------------------

@dataclass
class Result:
    verdict: Verdict
    expect: str = "true"
    summary: dict = field(default_factory=dict)
    header: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    curves: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def status(self) -> int:
        return _status(self.verdict, self.expect)


def _status(v: Verdict, expect: str) -> int:
    if v.label == expect:
        return 0
    return 3 if v.is_unknown else 2


def _combine(verdicts) -> Verdict:
    verdicts = list(verdicts)
    bad = [v for v in verdicts if v.is_false]
    if bad:
        return Verdict.false(bad[0].reason)
    unk = [v for v in verdicts if v.is_unknown]
    if unk:
        return Verdict.unknown(unk[0].reason)
    return Verdict.true()


def _case_status(v: Verdict, expect: str) -> Verdict:
    # fold a per-case expectation into a plain verdict for _combine
    s = _status(v, expect)
    if s == 0:
        return Verdict.true()
    return Verdict.unknown(v.reason) if s == 3 else Verdict.false(f"got {v.label}, expected {expect}")


def _sub_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([seed & ((1 << 64) - 1), *path]).generate_state(1)[0])


def _points(spec: dict, seed: int, tag: int) -> list:
    if "points" in spec:
        return [point_from_json(d) for d in spec["points"]]
    if "point" in spec:
        return [point_from_json(spec["point"])]
    if "sample" in spec:
        s = spec["sample"]
        lo, hi = s["norm"]
        kinds = tuple(s.get("kinds", ("finite", "geometric")))
        return [random_point_with_norm(rng_for(seed, tag, i), lo, hi, s.get("p", 2.0), kinds)
                for i in range(s["count"])]
    return [ZERO_POINT]


def _schedule(d: dict | None, seed: int) -> ApproachSchedule:
    d = d or {}
    samples = d.get("samples", 16)
    style = d.get("style", "coordinate")
    if "radii" in d:
        return ApproachSchedule(tuple(d["radii"]), samples, seed, style)
    return ApproachSchedule.dyadic(d.get("j_max", 40), d.get("step", 4), samples, seed, style)


def _topology(d: dict):
    if d["kind"] == "norm":
        return NormP(float(d.get("p", 2.0)))
    return Pointwise(float(d.get("p", 2.0)))


def _report_rows(label: str, ident: str, rep: CheckReport) -> list:
    return [[label, ident, repr(r.radius), repr(r.sup_gap.lo), repr(r.sup_gap.hi), r.n_samples]
            for r in rep.per_radius]


_GAP_HEADER = ["case", "check", "radius", "sup_gap_lo", "sup_gap_hi", "n_samples"]


# -- kinds -----------------------------------------------------------------------------

def _run_cases(p: dict, continuity: bool) -> Result:
    f = func_from_json(p["function"])
    seed, depth = p["seed"], p.get("depth", DEFAULT_DEPTH)
    res = Result(Verdict.true(), header=_GAP_HEADER)
    folded = []
    fam = p.get("families")
    if fam:
        if p["function"]["kind"] != "example41":
            raise ConfigError("families are defined for the example41 function only")
        wrong = []
        for n in range(fam["from"], fam["to"] + 1):
            vx, vy = evaluate(f, example_x(n)), evaluate(f, example_y(n))
            if not (vx.lo == vx.hi == 0.0 and vy.lo == vy.hi == 1.0):
                wrong.append(n)
        res.summary["families"] = {"range": [fam["from"], fam["to"]], "mismatches": wrong}
        folded.append(Verdict.of(not wrong))
    for ci, case in enumerate(p["cases"]):
        label = case.get("label", f"case{ci}")
        expect = case.get("expect", "true")
        topo = _topology(case["topology"])
        pts = _points(case, seed, 100 + ci)
        ts = [None] if continuity else case.get("ts", [case.get("t", 1)])
        verdicts, worst = [], None
        k = 0
        for i, x in enumerate(pts):
            for t in ts:
                sched = _schedule(case.get("schedule"), _sub_seed(seed, ci, k))
                if continuity:
                    rep = continuity_check(f, x, topo, sched, case.get("tol", 1e-6), depth)
                    ident = f"p{i}"
                else:
                    rep = ssc_check(f, x, t, topo, sched, case.get("tol", 1e-6), depth)
                    ident = f"p{i}t{t}"
                v = rep.verdict
                if v.is_false and "min_gap" in case:
                    gaps = [r.sup_gap.lo for r in rep.per_radius[-5:]]
                    if min(gaps) < case["min_gap"]:
                        v = Verdict.unknown(f"gap {min(gaps)!r} below declared {case['min_gap']!r}")
                verdicts.append(v)
                res.rows.extend(_report_rows(label, ident, rep))
                res.checks.append({"case": label, "check": ident, **rep.to_dict()})
                if worst is None or (rep.per_radius and rep.per_radius[-1].sup_gap.hi
                                     > worst.per_radius[-1].sup_gap.hi):
                    worst = rep
                k += 1
        cv = _combine(verdicts)
        res.summary[label] = {"verdict": cv.label, "expect": expect, "checks": len(verdicts),
                              "recorded_as": "expected-failure" if cv.is_false and expect == "false" else cv.label}
        if worst is not None:
            res.curves.append((label, worst.per_radius))
        folded.append(_case_status(cv, expect))
    res.verdict = _combine(folded)
    return res


def _kind_ssc(p: dict) -> Result:
    return _run_cases(p, continuity=False)


def _kind_continuity(p: dict) -> Result:
    return _run_cases(p, continuity=True)


def _ball_region(p: dict):
    g = region_from_json(p["region"])
    if not isinstance(g, Ball):
        raise ConfigError("sampling needs a ball region")
    return g


def _sampled_in(g: Ball, spec: dict, seed: int, tag: int, inside: bool) -> list:
    # norms in the sample spec are relative to the ball centre
    if g.center != ZERO_POINT:
        raise ConfigError("sampling is only supported for balls centred at zero")
    lo, hi = spec["norm"]
    if inside and hi >= g.radius:
        raise ConfigError(f"sample norms {spec['norm']} are not inside the radius {g.radius}")
    if not inside and lo <= g.radius:
        raise ConfigError(f"sample norms {spec['norm']} are not outside the closed ball")
    return _points({"sample": spec}, seed, tag)


def _kind_witness(p: dict) -> Result:
    g = _ball_region(p)
    pp, delta, seed = float(p["p"]), float(p["delta"]), p["seed"]
    f = prescribed_discontinuity_fn(g, pp)
    res = Result(Verdict.true(), expect=p.get("expect", "true"), header=_GAP_HEADER)
    folded = []
    pts = [point_from_json(d) for d in p.get("points", [])]
    if "sample" in p:
        pts += _sampled_in(g, p["sample"], seed, 1, inside=True)
    wit = []
    for i, x0 in enumerate(pts):
        w = discontinuity_witness(g, pp, x0, delta)
        if isinstance(w, Infeasible):
            wit.append({"point": f"g{i}", "infeasible": w.reason})
            folded.append(Verdict.unknown(w.reason))
            continue
        fx, fy = evaluate(f, x0), evaluate(f, w)
        jump = abs(fx - fy)
        d = dist_p(w, x0, pp)
        ok = jump.lo > fx.hi / 2 - 1e-9 and d.hi < delta
        wit.append({"point": f"g{i}", "f_x0": [fx.lo, fx.hi], "f_y": [fy.lo, fy.hi],
                    "distance_hi": d.hi, "coordinates": len(w.explicit), "certified": ok,
                    "witness": point_to_json(w)})
        folded.append(Verdict.of(ok))
    res.summary["witnesses"] = wit
    for section, tag in (("controls", 2), ("ssc", 3)):
        spec = p.get(section)
        if not spec:
            continue
        inside = section == "ssc"
        xs = _sampled_in(g, spec["sample"], seed, tag, inside=inside) if section == "controls" else \
            _points({"sample": spec["sample"]}, seed, tag)
        verdicts, worst, k = [], None, 0
        for i, x in enumerate(xs):
            for t in ([None] if section == "controls" else spec.get("ts", [1])):
                sched = _schedule(spec.get("schedule"), _sub_seed(seed, tag, k))
                if t is None:
                    rep = continuity_check(f, x, NormP(pp), sched, spec.get("tol", 1e-6))
                    ident = f"f{i}"
                else:
                    rep = ssc_check(f, x, t, NormP(pp), sched, spec.get("tol", 1e-6))
                    ident = f"s{i}t{t}"
                verdicts.append(rep.verdict)
                res.rows.extend(_report_rows(section, ident, rep))
                if worst is None or rep.per_radius[-1].sup_gap.hi > worst.per_radius[-1].sup_gap.hi:
                    worst = rep
                k += 1
        v = _combine(verdicts)
        res.summary[section] = {"verdict": v.label, "checks": len(verdicts)}
        if worst is not None:
            res.curves.append((section, worst.per_radius))
        folded.append(v)
    mods = []
    for m in p.get("moduli", []):
        x0 = point_from_json(m["point"]) if "point" in m else ZERO_POINT
        val = ssc_modulus(g, pp, x0, m["k"], m["eps"])
        ok = "expected" not in m or val == m["expected"]
        mods.append({"k": m["k"], "eps": m["eps"], "value": val, "matches": ok})
        folded.append(Verdict.of(ok))
    if mods:
        res.summary["moduli"] = mods
    lim = []
    for item in p.get("infeasible", []):
        q = float(item["p"])
        x0 = point_from_json(item["point"]) if "point" in item else ZERO_POINT
        w = discontinuity_witness(Ball(g.center, g.radius, q), q, x0, delta)
        got = isinstance(w, Infeasible)
        lim.append({"p": q, "infeasible": got, "reason": w.reason if got else ""})
        folded.append(Verdict.of(got))
    if lim:
        res.summary["documented_limitations"] = lim
    res.verdict = _combine(folded)
    return res


def _kind_modulus(p: dict) -> Result:
    g = region_from_json(p["region"])
    x0 = point_from_json(p["point"]) if "point" in p else ZERO_POINT
    val = ssc_modulus(g, float(p["p"]), x0, p["k"], p["eps"])
    res = Result(Verdict.true(), header=["k", "eps", "delta"], rows=[[p["k"], repr(p["eps"]), repr(val)]])
    res.summary = {"delta": val}
    if "expected" in p:
        res.summary["expected"] = p["expected"]
        res.verdict = Verdict.of(val == p["expected"])
    return res


def _kind_contraction(p: dict) -> Result:
    pp, seed, depth = float(p["p"]), p["seed"], p.get("depth", DEFAULT_DEPTH)
    chain = [closed_ball(point_from_json(c["center"]) if "center" in c else ZERO_POINT, c["radius"], pp)
             for c in p["chain"]]
    f = lambda x: contracting_image(chain, x, pp, depth)  # noqa: E731
    bound = float(p.get("bound", 0.5))
    ratio = lipschitz_ratio(f, p["pairs"], pp, seed, depth=depth)
    folded = [Verdict.of(ratio <= bound + 1e-9)]
    rows = [["max_ratio", repr(ratio)], ["pairs", p["pairs"]], ["bound", repr(bound)]]
    summary = {"max_ratio": ratio, "pairs": p["pairs"], "bound": bound}
    fp = p.get("fixed_point")
    if fp is not None:
        x0 = point_from_json(fp["start"]) if "start" in fp else ZERO_POINT
        trace: list = []
        try:
            xs, resid = fixed_point(f, x0, pp, fp.get("tol", 1e-10), fp.get("max_iter", 60), depth, trace)
        except NoConvergence as e:
            folded.append(Verdict.false(str(e)))
            summary["fixed_point"] = {"converged": False, "reason": str(e)}
        else:
            A1 = ClassIndex(1, "A")
            m_x, m_fx = class_membership(xs, A1), class_membership(f(xs), A1)
            to_zero = dist_trunc(xs, ZERO_POINT, pp, depth).hi
            summary["fixed_point"] = {
                "converged": True, "iterations": len(trace) - 1, "residual_hi": resid.hi,
                "distance_to_zero_hi": to_zero, "point": point_to_json(xs),
                "membership_A1": m_x.label, "image_membership_A1": m_fx.label,
                "narrative": (f"x* = f(x*); x* in A_1 is {m_x.label} and f(x*) in A_1 is {m_fx.label}. "
                              "If A_1 were the preimage of its complement, x* would lie in A_1 "
                              "exactly when it does not."),
            }
            rows += [["fixed_point_iterations", len(trace) - 1], ["fixed_point_residual_hi", repr(resid.hi)]]
            folded.append(Verdict.of(m_x.decided and m_x.value == m_fx.value))
    n_pre = p.get("preimage_points", 0)
    if n_pre:
        agree, decided = 0, 0
        A1 = ClassIndex(1, "A")
        for i in range(n_pre):
            rng = rng_for(seed, 5, i)
            lo, hi = (0.0, 0.9) if rng.random() < 0.5 else (1.1, 3.0)
            x = random_point_with_norm(rng, max(lo, 1e-3), hi, pp)
            inside = _combine_any(c.membership(x) for c in chain)
            if not inside.decided:
                continue
            decided += 1
            img = class_membership(f(x), A1)
            agree += int(img.decided and img.value == inside.value)
        summary["preimage"] = {"points": n_pre, "decided": decided, "agree": agree}
        rows += [["preimage_decided", decided], ["preimage_agree", agree]]
        folded.append(Verdict.of(decided == n_pre and agree == decided))
    return Result(_combine(folded), header=["quantity", "value"], rows=rows, summary=summary)


def _combine_any(verdicts) -> Verdict:
    verdicts = list(verdicts)
    if any(v.is_true for v in verdicts):
        return Verdict.true()
    if all(v.is_false for v in verdicts):
        return Verdict.false()
    return Verdict.unknown("undecided chain membership")


def _kind_borel(p: dict) -> Result:
    seed = p["seed"]
    alphas = p.get("alphas", [1, 2, 3, 4, 5])
    rows, bad = [], 0
    fams = (("finite", p.get("finite_points", 100), 1), ("geometric", p.get("geometric_points", 100), 0))
    for fam, count, odd_member in fams:
        for i in range(count):
            x = random_point(rng_for(seed, 9, odd_member, i), (fam,))
            for a in alphas:
                want = (a % 2 == 1) == bool(odd_member)
                for kind in ("A", "B"):
                    v = class_membership(x, ClassIndex(a, kind))
                    exp = want if kind == "A" else not want
                    if not (v.decided and v.value == exp):
                        bad += 1
                    rows.append([f"{fam}{i}", a, kind, v.label])
    s_open = {}
    verdicts = [Verdict.of(bad == 0)]
    for a in p.get("s_open_alphas", [1, 2, 3]):
        rep = class_is_s_open_check(ClassIndex(a, "A"), p.get("s_open_samples", 100), _sub_seed(seed, a))
        s_open[str(a)] = {"verdict": rep.verdict.label, "notes": rep.notes}
        verdicts.append(rep.verdict)
    return Result(_combine(verdicts), header=["point_id", "alpha", "kind", "verdict"], rows=rows,
                  summary={"parity_violations": bad, "s_open": s_open})


def _kind_baire2(p: dict) -> Result:
    seed = p["seed"]
    kinds = tuple(p.get("kinds", ["finite", "geometric"]))
    rows, verdicts = [], []
    for i in range(p["points"]):
        x = random_point(rng_for(seed, 11, i), kinds)
        chi = class_membership(x, ClassIndex(1, "A"))
        lim, inner = baire2_iterated_limit(x)
        if lim is None or not chi.decided:
            verdicts.append(Verdict.unknown(f"point {i}: no stable limit"))
        else:
            verdicts.append(Verdict.of(lim == float(chi.value)))
        rows.append([i, "" if not chi.decided else int(chi.value), "" if lim is None else repr(lim), len(inner)])
    return Result(_combine(verdicts), header=["point_id", "chi_A1", "limit", "m_max"], rows=rows,
                  summary={"points": p["points"]})


def _kind_determining(p: dict) -> Result:
    E = coordinate_zero_set(p["coordinate"])
    base = point_from_json(p["base"]) if "base" in p else ZERO_POINT
    box = NearlyOpenBox(base, {int(n): (float(lo), float(hi)) for n, (lo, hi) in p["box"].items()})
    fals = superdensity_falsify(E, box, p.get("budget", 100), p["seed"])
    if fals.outcome != "emptiness":
        v = Verdict.false(f"falsifier outcome {fals.outcome}") if fals.outcome == "member" else \
            Verdict.unknown(fals.detail)
        return Result(v, summary={"falsifier": fals.outcome, "detail": fals.detail})
    rep = determining_demo(E, box, p.get("samples", 100), p["seed"])
    fc = evaluate(box.bump(), box.center())
    summary = {"falsifier": fals.outcome, "detail": fals.detail, "f_centre": [fc.lo, fc.hi],
               "notes": rep.notes, "centre": point_to_json(box.center())}
    rows = [["falsifier", fals.outcome], ["f_centre_lo", repr(fc.lo)], ["f_centre_hi", repr(fc.hi)],
            ["verdict", rep.verdict.label]]
    return Result(rep.verdict, header=["quantity", "value"], rows=rows, summary=summary)


_RUNNERS = {
    "ssc_check": _kind_ssc,
    "continuity": _kind_continuity,
    "witness": _kind_witness,
    "modulus": _kind_modulus,
    "contraction": _kind_contraction,
    "borel_parity": _kind_borel,
    "baire2": _kind_baire2,
    "determining": _kind_determining,
}


# -- output ----------------------------------------------------------------------------

def _csv(res: Result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(res.header or ["verdict"])
    if res.header:
        w.writerows(res.rows)
    else:
        w.writerow([res.verdict.label])
    return buf.getvalue()


def _clean(obj):
    # JSON has no inf/nan; keep documents strictly valid
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def document(cfg: dict, res: Result) -> dict:
    return _clean({
        "name": cfg["name"],
        "kind": cfg["kind"],
        "seed": cfg["params"]["seed"],
        "verdict": res.verdict.label,
        "reason": res.verdict.reason,
        "expect": res.expect,
        "status": res.status(),
        "summary": res.summary,
        "checks": res.checks,
    })


def execute(cfg: dict) -> tuple[int, dict, Result]:
    """Validate and run ``cfg``; raises ``ConfigError`` on bad input."""
    validate(cfg)
    try:
        res = _RUNNERS[cfg["kind"]](cfg["params"])
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"{type(e).__name__}: {e}") from None
    return res.status(), document(cfg, res), res


def _write_outputs(cfg: dict, doc: dict, res: Result) -> None:
    for out in cfg.get("outputs", []):
        path = Path(out["path"])
        path.parent.mkdir(parents=True, exist_ok=True)
        if out["format"] == "json":
            text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
        elif out["format"] == "csv":
            text = _csv(res)
        else:
            text = gap_plot(res.curves, cfg["name"])
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _error(msg: str, stderr) -> int:
    stderr.write(json.dumps({"error": "config", "message": msg}, sort_keys=True) + "\n")
    return 1


def run_config(cfg, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        status, doc, res = execute(cfg)
    except ConfigError as e:
        return _error(str(e), stderr)
    except SSCLabError as e:
        return _error(f"{type(e).__name__}: {e}", stderr)
    try:
        _write_outputs(cfg, doc, res)
    except OSError as e:
        return _error(f"cannot write output: {e}", stderr)
    if cfg.get("outputs"):
        stdout.write(f"{cfg['name']}: {doc['verdict']} (expected {doc['expect']}), status {status}\n")
    else:
        stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return status


def run_path(path: str, stdout=None, stderr=None) -> int:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        return _error(f"cannot read config {path}: {e}", stderr or sys.stderr)
    return run_config(cfg, stdout, stderr)


def list_demos() -> list[str]:
    root = resources.files("ssc_lab") / "demos"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_demo(name: str) -> dict:
    cfg = json.loads((resources.files("ssc_lab") / "demos" / f"{name}.json").read_text(encoding="utf-8"))
    cfg["params"]["seed"] = DEMO_SEED
    return cfg


def demo(name: str, stdout=None, stderr=None) -> int:
    stderr = stderr or sys.stderr
    names = list_demos()
    if name not in names:
        stderr.write(json.dumps({"error": "unknown demo", "name": name, "available": names},
                                sort_keys=True) + "\n")
        return 1
    return run_config(load_demo(name), stdout, stderr)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ssc-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    d = sub.add_parser("demo", help="run a bundled demo")
    d.add_argument("name")
    sub.add_parser("list-demos", help="list bundled demos")
    args = ap.parse_args(argv)
    if args.cmd == "run":
        return run_path(args.config)
    if args.cmd == "demo":
        return demo(args.name)
    for n in list_demos():
        print(n)
    return 0


if __name__ == "__main__":
    sys.exit(main())
