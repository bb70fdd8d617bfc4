"""Seeded random instances for benchmarks, cross-checks, and property tests.

Breakpoints snap to a coarse grid and densities come from small integer
weights, which keeps the maximum density moderate (at most grid/min_gap) and
gives instances whose envy-free regions tend to intersect oracle grids.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .cake import PiecewiseConstantValuation


def random_valuation(rng: random.Random, *, grid: int = 16, max_segments: int = 3,
                     max_weight: int = 4, min_gap: int = 2) -> PiecewiseConstantValuation:
    """One normalized piecewise-constant valuation with grid-aligned breakpoints."""
    while True:
        segments = rng.randint(1, max_segments)
        if segments == 1:
            return PiecewiseConstantValuation.uniform()
        points = range(min_gap, grid, min_gap)
        if segments - 1 > len(points):
            segments = len(points) + 1
        interior = sorted(rng.sample(points, segments - 1))
        breakpoints = [Fraction(0)] + [Fraction(j, grid) for j in interior] + [Fraction(1)]
        weights = [rng.randint(0, max_weight) for _ in range(segments)]
        if any(weights):
            return PiecewiseConstantValuation.normalized(breakpoints, weights)


def random_valuations(rng: random.Random, n: int, **kwargs) -> list[PiecewiseConstantValuation]:
    return [random_valuation(rng, **kwargs) for _ in range(n)]


def planted_envy_free_instance(rng: random.Random, n: int, *, grid: int = 16):
    """Random valuations plus a grid division that is exactly envy-free.

    Each player's valuation puts at least half its mass on their planted
    piece, so no other piece can beat it; useful for oracle cross-checks where
    the grid optimum must be zero.
    """
    cuts = sorted(rng.sample(range(1, grid), n - 1))
    bounds = [0] + cuts + [grid]
    assignment = list(range(n))
    rng.shuffle(assignment)
    valuations = []
    for player in range(n):
        piece = assignment[player]
        weights = [rng.randint(0, 2) for _ in range(grid)]
        others = sum(w for j, w in enumerate(weights)
                     if not bounds[piece] <= j < bounds[piece + 1])
        boost = max(others, 1)
        for j in range(bounds[piece], bounds[piece + 1]):
            weights[j] = boost
        breakpoints = [Fraction(j, grid) for j in range(grid + 1)]
        valuations.append(PiecewiseConstantValuation.normalized(breakpoints, weights))
    planted_cuts = tuple(Fraction(c, grid) for c in cuts)
    owner = {player + 1: assignment[player] + 1 for player in range(n)}
    return valuations, planted_cuts, owner
