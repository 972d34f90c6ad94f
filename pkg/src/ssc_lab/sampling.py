"""Seeded random streams and random representable points."""

from __future__ import annotations

import numpy as np

from .seqpoint import (
    Geometric,
    Masked,
    PowerLaw,
    SeqPoint,
    make_point,
    p_norm,
    scaled,
)

_MASK = (1 << 64) - 1


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Independent stream for ``(seed, *path)``; identical inputs give
    identical streams regardless of evaluation order."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & _MASK, *map(int, path)]))


def _values(rng: np.random.Generator, k: int, scale: float) -> list[float]:
    vals = rng.uniform(-scale, scale, size=k)
    # avoid exact zeros so the support is what was drawn
    return [float(v) if v != 0.0 else scale / 2 for v in vals]


def random_finite_point(rng: np.random.Generator, max_index: int = 12,
                        max_terms: int = 5, scale: float = 1.0) -> SeqPoint:
    k = int(rng.integers(1, max_terms + 1))
    idx = rng.choice(np.arange(1, max_index + 1), size=min(k, max_index), replace=False)
    return make_point(zip(map(int, idx), _values(rng, len(idx), scale)))


def random_geometric_point(rng: np.random.Generator, max_start: int = 6) -> SeqPoint:
    """Full-support point: a few explicit entries then ``c r^(n-start)``
    with ``c in [1,2]``, ``r in [1/2, 3/4]`` up to sign."""
    start = int(rng.integers(1, max_start + 1))
    c = float(rng.uniform(1.0, 2.0)) * (1 if rng.random() < 0.5 else -1)
    r = float(rng.uniform(0.5, 0.75)) * (1 if rng.random() < 0.7 else -1)
    entries = []
    for n in range(1, start):
        if rng.random() < 0.6:
            entries.append((n, float(rng.uniform(0.5, 2.0))))
    return make_point(entries, Geometric(c, r, start))


def random_powerlaw_point(rng: np.random.Generator, max_start: int = 6) -> SeqPoint:
    start = int(rng.integers(1, max_start + 1))
    c = float(rng.uniform(0.5, 2.0))
    s = float(rng.uniform(1.2, 3.0))
    entries = [(n, float(rng.uniform(-1.0, 1.0))) for n in range(1, start) if rng.random() < 0.5]
    return make_point(entries, PowerLaw(c, s, start))


def random_masked_point(rng: np.random.Generator, max_block: int = 3) -> SeqPoint:
    block = int(rng.integers(1, max_block + 1))
    c = float(rng.uniform(0.5, 2.0))
    r = float(rng.choice([0.5, 0.25, 0.75]))
    return make_point([(1, float(rng.uniform(-1, 1)))] if block != 1 else [],
                      Masked(Geometric(c, r, 2), block))


def random_point(rng: np.random.Generator, kinds=("finite", "geometric", "powerlaw", "masked")) -> SeqPoint:
    kind = kinds[int(rng.integers(0, len(kinds)))]
    return {
        "finite": random_finite_point,
        "geometric": random_geometric_point,
        "powerlaw": random_powerlaw_point,
        "masked": random_masked_point,
    }[kind](rng)


def random_point_with_norm(rng: np.random.Generator, lo: float, hi: float, p: float,
                           kinds=("finite", "geometric")) -> SeqPoint:
    """Random point whose certified ``p``-norm lies in ``[lo, hi]``."""
    x = random_point(rng, kinds)
    target = float(rng.uniform(lo, hi))
    nrm = p_norm(x, p)
    y = scaled(x, target / nrm.mid)
    ny = p_norm(y, p)
    if ny.lo < lo or ny.hi > hi:
        # rescaling rounded us past an edge; pull toward the middle
        y = scaled(x, 0.5 * (lo + hi) / nrm.mid)
    return y


def small_geometric_tail(rng: np.random.Generator, start: int, size: float):
    c = float(rng.uniform(0.5, 1.0)) * size
    r = float(rng.choice([0.5, 0.25]))
    return Geometric(c, r, start)


__all__ = [
    "rng_for", "random_point", "random_finite_point", "random_geometric_point",
    "random_powerlaw_point", "random_masked_point", "random_point_with_norm",
    "small_geometric_tail",
]
