"""NSGA-II: elitist (mu + lambda) survival on rank, then crowding distance."""

from __future__ import annotations

import numpy as np

from ..dominance import crowding_distance, fast_nondominated_sort
from .base import Population, RunContext, binary_tournament, make_offspring


def rank_and_crowding(F) -> tuple[np.ndarray, np.ndarray]:
    """0-based front index and within-front crowding distance of every row."""
    fronts = fast_nondominated_sort(F)
    rank = np.empty(F.shape[0], dtype=np.int64)
    crowd = np.empty(F.shape[0])
    for r, front in enumerate(fronts):
        rank[front] = r
        crowd[front] = crowding_distance(F[front])
    return rank, crowd


def nsga2_survivors(F, n: int) -> np.ndarray:
    """Indices of the ``n`` best rows: whole fronts, then most isolated of the split front."""
    chosen: list[int] = []
    for front in fast_nondominated_sort(F):
        room = n - len(chosen)
        if room <= 0:
            break
        if front.size <= room:
            chosen.extend(front.tolist())
        else:
            cd = crowding_distance(F[front])
            order = np.argsort(-cd, kind="stable")
            chosen.extend(front[order[:room]].tolist())
    return np.array(chosen, dtype=np.int64)


def crowded_keys(F) -> np.ndarray:
    rank, crowd = rank_and_crowding(F)
    return np.column_stack([-rank.astype(float), crowd])


def nsga2_generation(pop: Population, ctx: RunContext) -> Population:
    keys = crowded_keys(pop.F)
    kids = make_offspring(ctx, pop.X, lambda rng: binary_tournament(keys, rng), len(pop))
    ctx.evaluate(kids)
    pool = Population.concat(pop, kids)
    return pool.take(nsga2_survivors(pool.F, len(pop)))
