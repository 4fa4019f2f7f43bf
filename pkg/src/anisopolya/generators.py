"""Seeded random inputs for the verification batteries.

All draws flow through numpy Generators keyed by (base seed, trial
index), so any battery row can be reproduced from the pair printed in
its report.
"""

from __future__ import annotations

import numpy as np

from .pwa import AnisotropicNorm, PiecewiseAffine, WeightFunction

# interior knots are kept at least this far apart to avoid slope blowups
KNOT_GAP = 1e-4


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Deterministic per-trial generator derived from one base seed."""
    return np.random.default_rng((int(seed), int(trial)))


def random_function(rng: np.random.Generator, max_pieces: int = 12,
                    monotone: str | None = None) -> PiecewiseAffine:
    """Random piecewise-affine function with values in [0, 1].

    Piece count is uniform on 1..max_pieces.  With monotone="down" or
    "up" the values are sorted to force an exactly monotone input.
    """
    pieces = int(rng.integers(1, max_pieces + 1))
    while True:
        inner = np.sort(rng.uniform(0.0, 1.0, pieces - 1))
        bp = np.concatenate([[0.0], inner, [1.0]])
        if np.all(np.diff(bp) >= KNOT_GAP):
            break
        pieces = max(1, pieces - 1)
    vals = rng.uniform(0.0, 1.0, pieces + 1)
    if monotone == "down":
        vals = np.sort(vals)[::-1]
    elif monotone == "up":
        vals = np.sort(vals)
    return PiecewiseAffine(bp, vals)


def random_norm(rng: np.random.Generator) -> AnisotropicNorm:
    """Random two-sided slope cost with well-separated rates."""
    a = float(np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
    b = float(np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
    p = float(rng.choice([1.5, 2.0, 2.5, 3.0]))
    return AnisotropicNorm(a, b, p)


def random_weight(rng: np.random.Generator, max_pieces: int = 6) -> WeightFunction:
    """Random sign-changing piecewise-constant weight, some piece positive."""
    pieces = int(rng.integers(1, max_pieces + 1))
    while True:
        inner = np.sort(rng.uniform(0.0, 1.0, pieces - 1))
        bp = np.concatenate([[0.0], inner, [1.0]])
        if np.all(np.diff(bp) >= KNOT_GAP):
            break
        pieces = max(1, pieces - 1)
    vals = rng.uniform(-1.0, 2.0, pieces)
    if not np.any(vals > 0.0):
        vals[int(rng.integers(0, pieces))] = float(rng.uniform(0.1, 2.0))
    return WeightFunction(bp, vals)
