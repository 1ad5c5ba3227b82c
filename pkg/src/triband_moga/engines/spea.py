"""SPEA: strength fitness over population plus external archive."""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..dominance import crowding_distance, nondominated_indices
from .base import Population, RunContext, binary_tournament, make_offspring


def spea_fitness(F) -> tuple[np.ndarray, np.ndarray]:
    """(strength, fitness); lower fitness is better.

    strength(i) = |{j : i dominates j}| / (n + 1);
    fitness(i) = 1 + sum of the strengths of everything dominating i.
    """
    D = kernels.domination_matrix(F)
    strength = D.sum(axis=1) / (F.shape[0] + 1.0)
    fitness = 1.0 + D.T.astype(np.float64) @ strength
    return strength, fitness


def truncate_archive(arch: Population, capacity: int) -> Population:
    """Drop the most crowded member until ``capacity`` remain."""
    while len(arch) > capacity:
        cd = crowding_distance(arch.F)
        drop = int(np.argmin(cd))
        keep = np.delete(np.arange(len(arch)), drop)
        arch = arch.take(keep)
    return arch


def update_archive(pop: Population, archive: Population | None, capacity: int):
    """New archive plus the combined pool and its fitness (archive members first)."""
    union = pop if archive is None or len(archive) == 0 else Population.concat(archive, pop)
    _, fitness = spea_fitness(union.F)
    nd = union.take(nondominated_indices(union.F))
    _, first = np.unique(nd.F, axis=0, return_index=True)
    nd = nd.take(np.sort(first))
    return truncate_archive(nd, capacity), union, fitness


def spea_generation(pop: Population, archive: Population | None, ctx: RunContext):
    cap = ctx.config.archive_size or ctx.config.population
    new_archive, union, fitness = update_archive(pop, archive, cap)
    keys = -fitness
    kids = make_offspring(ctx, union.X, lambda rng: binary_tournament(keys, rng), len(pop))
    return kids, new_archive
