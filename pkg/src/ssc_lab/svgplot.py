"""Minimal SVG plots of sup-gap against log radius."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .outcome import RadiusRecord

_W, _H = 640, 400
_L, _R, _T, _B = 70, 20, 40, 50
_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def gap_plot(curves: list[tuple[str, list[RadiusRecord]]], title: str = "") -> str:
    """One polyline per curve through the gap midpoints, with a vertical
    bar spanning each certified ``[lo, hi]``.  Gaps are clipped to
    ``[0, 1.05]`` since every function here takes values in ``[0, 1]``."""
    pts = [(math.log2(r.radius), r) for _, recs in curves for r in recs]
    xs = [x for x, _ in pts] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    y1 = 1.05

    def sx(x: float) -> float:
        return _L + (x - x0) / (x1 - x0) * (_W - _L - _R)

    def sy(y: float) -> float:
        y = min(max(y, 0.0), y1)
        return _H - _B - y / y1 * (_H - _T - _B)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W // 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<line x1="{_L}" y1="{_H - _B}" x2="{_W - _R}" y2="{_H - _B}" stroke="black"/>',
        f'<line x1="{_L}" y1="{_T}" x2="{_L}" y2="{_H - _B}" stroke="black"/>',
    ]
    for k in range(6):
        y = k * 0.2
        out.append(f'<line x1="{_L - 4}" y1="{_fmt(sy(y))}" x2="{_L}" y2="{_fmt(sy(y))}" stroke="black"/>')
        out.append(f'<text x="{_L - 8}" y="{_fmt(sy(y) + 4)}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{y:.1f}</text>')
    step = max(1, math.ceil((x1 - x0) / 10))
    tick = math.ceil(x0)
    while tick <= x1:
        out.append(f'<line x1="{_fmt(sx(tick))}" y1="{_H - _B}" x2="{_fmt(sx(tick))}" y2="{_H - _B + 4}" stroke="black"/>')
        out.append(f'<text x="{_fmt(sx(tick))}" y="{_H - _B + 18}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{tick}</text>')
        tick += step
    out.append(f'<text x="{(_L + _W - _R) // 2}" y="{_H - 10}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="12">log2(radius)</text>')
    out.append(f'<text x="16" y="{(_T + _H - _B) // 2}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="12" transform="rotate(-90 16 {(_T + _H - _B) // 2})">sup gap</text>')
    for i, (label, recs) in enumerate(curves):
        colour = _COLOURS[i % len(_COLOURS)]
        line = []
        for r in recs:
            x = sx(math.log2(r.radius))
            lo, hi = r.sup_gap.lo, r.sup_gap.hi
            out.append(f'<line x1="{_fmt(x)}" y1="{_fmt(sy(lo))}" x2="{_fmt(x)}" y2="{_fmt(sy(hi))}" '
                       f'stroke="{colour}" stroke-width="2"/>')
            line.append(f"{_fmt(x)},{_fmt(sy(0.5 * (lo + min(hi, y1))))}")
        if line:
            out.append(f'<polyline points="{" ".join(line)}" fill="none" stroke="{colour}" stroke-opacity="0.6"/>')
        out.append(f'<text x="{_W - _R - 4}" y="{_T + 14 * (i + 1)}" text-anchor="end" fill="{colour}" '
                   f'font-family="sans-serif" font-size="11">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
