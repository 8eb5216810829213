"""Shared oracles for the test suite.

The best-response oracle evaluates the full cost at every grid point in exact
rational arithmetic and applies the tie-break rule itself; it never calls the
engine's bracketing path, so the two sides stay independent.
"""

from __future__ import annotations

import random
import warnings
from fractions import Fraction

from opdyn.model import ModelParams, OpinionGrid, SocialGraph, recommend


def quiet_params(b, weight_precision_k=None) -> ModelParams:
    """ModelParams that stays silent for b = 0 (drawn deliberately here)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ModelParams(b, weight_precision_k)


def oracle_cost(i, y_index, profile, graph, params, grid):
    """Exact cost of opinion index y for agent i, straight from the formula."""
    M = grid.inv_delta
    y = Fraction(y_index, M)
    s = recommend(profile[i], grid)
    total = params.b * (y - s) ** 2
    for j, w in graph.adjacency[i]:
        total += w * (y - Fraction(profile[j], M)) ** 2
    return total


def oracle_best_response(i, profile, graph, params, grid):
    """Exhaustive exact argmin over the whole grid with the stated tie-break:
    current opinion if minimizing, then smaller |value|, then smaller value."""
    costs = [(m, oracle_cost(i, m, profile, graph, params, grid)) for m in grid.indices()]
    best = min(c for _, c in costs)
    minimizers = [m for m, c in costs if c == best]
    if profile[i] in minimizers:
        return profile[i]
    return min(minimizers, key=lambda m: (abs(m), m))


def oracle_minimizer_set(i, profile, graph, params, grid):
    costs = [(m, oracle_cost(i, m, profile, graph, params, grid)) for m in grid.indices()]
    best = min(c for _, c in costs)
    return [m for m, c in costs if c == best]


def random_instance(rng: random.Random, n_max=12, deltas=("1/2", "1/4", "1/8"), exact=False):
    """A random weighted graph, params, grid, and profile for oracle checks.
    exact=True draws integer weights and sets precision 0."""
    n = rng.randint(1, n_max)
    grid = OpinionGrid(rng.choice(list(deltas)))
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.5:
                w = rng.randint(1, 5) if exact else rng.uniform(0.1, 5.0)
                edges.append((i, j, w))
    graph = SocialGraph(n, edges)
    b = rng.randint(0, 4) if exact else rng.uniform(0.0, 4.0)
    params = quiet_params(b, weight_precision_k=0 if exact else None)
    profile = tuple(rng.choice(list(grid.indices())) for _ in range(n))
    return graph, params, grid, profile
