"""Weighted-sum GA: F = sum_k w_k |S11_k| maximised, one elite slot, tournament."""

from __future__ import annotations

import numpy as np

from .base import Best, Population, RunContext, binary_tournament, make_offspring


def scalarize(F, weights) -> np.ndarray:
    return np.abs(np.atleast_2d(F)) @ np.asarray(weights, dtype=np.float64)


def update_best(pop: Population, fitness, best: Best) -> Best:
    """Keep the incumbent unless this generation's best is strictly better."""
    i = int(np.argmax(fitness))
    if fitness[i] > best.fitness:
        return Best(pop.X[i].copy(), pop.F[i].copy(), float(fitness[i]))
    return best


def scalar_generation(pop: Population, ctx: RunContext, best: Best) -> tuple[Population, Best]:
    fit = ctx.fitness(pop.F)
    best = update_best(pop, fit, best)
    elite = Population(best.x[None, :].copy(), best.f[None, :].copy())
    kids = make_offspring(ctx, pop.X, lambda rng: binary_tournament(fit, rng), len(pop) - 1)
    return Population.concat(elite, kids), best
