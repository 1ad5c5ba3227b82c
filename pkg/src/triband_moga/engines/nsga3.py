"""NSGA-III: NSGA-II skeleton with reference-direction niching on the split front."""

from __future__ import annotations

from ..diversity import ReferencePointSet, das_dennis, nsga3_select
from ..dominance import front_ranks
from .base import Population, RunContext, binary_tournament, make_offspring


def reference_points(ctx: RunContext) -> ReferencePointSet:
    return das_dennis(ctx.problem.n_obj, ctx.config.ref_divisions)


def nsga3_generation(pop: Population, ctx: RunContext, refs: ReferencePointSet) -> Population:
    keys = -front_ranks(pop.F)
    kids = make_offspring(ctx, pop.X, lambda rng: binary_tournament(keys, rng), len(pop))
    ctx.evaluate(kids)
    pool = Population.concat(pop, kids)
    return pool.take(nsga3_select(pool.F, refs, len(pop), ctx.rng))
