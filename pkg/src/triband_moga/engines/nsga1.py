"""NSGA: front-wise dummy fitness with sharing, no elitism."""

from __future__ import annotations

from ..diversity import SharingConfig, front_shared_fitness
from .base import Population, RunContext, binary_tournament, make_offspring, proportionate_pick


def nsga1_generation(pop: Population, ctx: RunContext) -> Population:
    c = ctx.config
    fit = front_shared_fitness(pop.F, SharingConfig(c.sigma_share, c.alpha))
    if c.nsga1_selection == "proportionate":
        pick = lambda rng: proportionate_pick(fit, rng)  # noqa: E731
    else:
        pick = lambda rng: binary_tournament(fit, rng)  # noqa: E731
    return make_offspring(ctx, pop.X, pick, len(pop))
