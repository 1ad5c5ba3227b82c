"""Generation loop shared by all six engines."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..dominance import nondominated_indices
from ..evaluator import BenchmarkProblem, Problem, make_problem, reference_front
from ..metrics import convergence_speed, gd, igd, population_diversity
from .base import Best, Population, RunConfig, RunContext, initial_population
from .nsga1 import nsga1_generation
from .nsga2 import nsga2_generation
from .nsga3 import nsga3_generation, reference_points
from .pga import pga_generation
from .scalar import scalar_generation, update_best
from .spea import spea_generation, update_archive


@dataclass
class GenerationTrace:
    generation: int
    best_fitness: float
    front: np.ndarray
    diversity: float
    convergence_speed: float | None = None
    gd: float | None = None
    igd: float | None = None


@dataclass
class RunResult:
    config: RunConfig
    problem: Problem
    population: Population
    front: Population
    best: Best
    trace: list[GenerationTrace]
    reference: np.ndarray | None = None
    evaluations: int = 0
    duration_s: float = 0.0
    archive_history: list[Population] = field(default_factory=list)


class RunAborted(RuntimeError):
    """Evaluation failed mid-run; ``partial`` holds everything up to the failure."""

    def __init__(self, cause: BaseException, partial: RunResult):
        super().__init__(f"run aborted: {cause}")
        self.cause = cause
        self.partial = partial


def _final_front(pop: Population) -> Population:
    return pop.take(nondominated_indices(pop.F))


def finalize_trace(trace: list[GenerationTrace], reference: np.ndarray | None) -> None:
    """Fill convergence speed and GD/IGD once the reference front is known."""
    if len(trace) >= 2:
        speeds = convergence_speed([t.best_fitness for t in trace])
        for t, s in zip(trace[1:], speeds):
            t.convergence_speed = float(s)
    if reference is None or len(reference) == 0:
        return
    for t in trace:
        if len(t.front):
            t.gd = gd(t.front, reference)
            t.igd = igd(t.front, reference)


def run(config: RunConfig, problem: Problem | None = None,
        reference: np.ndarray | None = None, keep_archives: bool = False) -> RunResult:
    """Execute ``config.generations`` generations of the configured engine.

    The reference front for GD/IGD defaults to the analytic front for
    benchmark problems and to the non-dominated set of every point the run
    evaluated otherwise.
    """
    config.validate()
    t0 = time.perf_counter()
    if problem is None:
        problem = make_problem(config.evaluator, timeout=config.external_timeout)
    ctx = RunContext.create(problem, config)
    algo = config.algorithm
    refs = reference_points(ctx) if algo == "nsga3" else None
    cap = config.archive_size or config.population

    trace: list[GenerationTrace] = []
    archives: list[Population] = []
    pop = initial_population(ctx)
    front: Population | None = None
    archive: Population | None = None
    best = Best()

    def record(g: int, fr: Population, best_fit: float) -> None:
        trace.append(GenerationTrace(g, best_fit, fr.F.copy(), population_diversity(pop.X)))

    def result(front_pop) -> RunResult:
        ref = reference
        if ref is None:
            if isinstance(problem, BenchmarkProblem):
                ref = reference_front(problem.name)
            elif ctx.pool_F is not None:
                ref = ctx.pool_F
        finalize_trace(trace, ref)
        return RunResult(config, problem, pop, front_pop, best if algo == "scalar" else ctx.best,
                         trace, ref, ctx.evaluations, time.perf_counter() - t0, archives)

    try:
        ctx.evaluate(pop)
        for g in range(1, config.generations + 1):
            last = g == config.generations
            if algo in ("nsga2", "nsga3"):
                pop = nsga2_generation(pop, ctx) if algo == "nsga2" else nsga3_generation(pop, ctx, refs)
                front = _final_front(pop)
                record(g, front, ctx.best.fitness)
            elif algo in ("pga", "nsga1"):
                front = _final_front(pop)
                record(g, front, ctx.best.fitness)
                if not last:
                    step = pga_generation if algo == "pga" else nsga1_generation
                    pop = ctx.evaluate(step(pop, ctx))
            elif algo == "spea":
                if last:
                    archive, _, _ = update_archive(pop, archive, cap)
                    nxt = None
                else:
                    nxt, archive = spea_generation(pop, archive, ctx)
                if keep_archives:
                    archives.append(archive.take(np.arange(len(archive))))
                front = archive
                record(g, front, ctx.best.fitness)
                if nxt is not None:
                    pop = ctx.evaluate(nxt)
            else:
                if last:
                    best = update_best(pop, ctx.fitness(pop.F), best)
                    front = _final_front(pop)
                    record(g, front, best.fitness)
                else:
                    nxt, best = scalar_generation(pop, ctx, best)
                    front = _final_front(pop)
                    record(g, front, best.fitness)
                    pop = ctx.evaluate(nxt)
    except Exception as exc:
        fallback = front if front is not None else Population(pop.X[:0], pop.F[:0])
        raise RunAborted(exc, result(fallback)) from exc
    return result(front)
