"""Pareto GA: Fonseca-Fleming ranking, fitness sharing, one elite plus tournament."""

from __future__ import annotations

import numpy as np

from ..diversity import SharingConfig, normalize_objectives, shared_fitness
from ..dominance import fonseca_rank
from .base import Population, RunContext, binary_tournament, make_offspring

ELITE_COUNT = 1


def pga_fitness(F, cfg: SharingConfig) -> tuple[np.ndarray, np.ndarray]:
    """(rank, shared fitness) with raw fitness ``1 / rank`` shared over the population."""
    rank = fonseca_rank(F)
    return rank, shared_fitness(1.0 / rank, normalize_objectives(F), cfg)


def pga_generation(pop: Population, ctx: RunContext) -> Population:
    cfg = SharingConfig(ctx.config.sigma_share, ctx.config.alpha)
    rank, fit = pga_fitness(pop.F, cfg)
    rank1 = np.flatnonzero(rank == 1)
    order = rank1[np.argsort(-fit[rank1], kind="stable")]
    elite = pop.take(order[:ELITE_COUNT])
    kids = make_offspring(ctx, pop.X, lambda rng: binary_tournament(fit, rng),
                          len(pop) - len(elite))
    return Population.concat(elite, kids)
