"""Shared pieces of the generation loop: config, population, selection, variation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ..dominance import nondominated_indices
from ..evaluator import Problem
from ..genome import polynomial_mutation, random_vector, sbx_crossover

ALGORITHMS = ("pga", "nsga1", "nsga2", "nsga3", "spea", "scalar")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    algorithm: str = "scalar"
    population: int = 10
    generations: int = 10
    seed: int = 0
    evaluator: str = "surrogate"
    weights: tuple[float, ...] | None = None
    sigma_share: float = 0.1
    alpha: float = 1.0
    ref_divisions: int = 4
    archive_size: int | None = None
    crossover_rate: float = 0.9
    crossover_eta: float = 15.0
    mutation_rate: float | None = None
    mutation_eta: float = 20.0
    nsga1_selection: str = "tournament"
    jobs: int = 1
    external_timeout: float = 600.0

    def validate(self) -> "RunConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.population < 2:
            raise ConfigError("population must be >= 2")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if np.any(w < 0) or not np.any(w > 0):
                raise ConfigError("weights must be >= 0 with at least one positive")
        if self.archive_size is not None and self.archive_size < 1:
            raise ConfigError("archive size must be >= 1")
        if self.ref_divisions < 1:
            raise ConfigError("ref divisions must be >= 1")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigError("crossover rate must lie in [0, 1]")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError("mutation rate must lie in [0, 1]")
        if self.sigma_share <= 0 or self.alpha <= 0:
            raise ConfigError("sigma_share and alpha must be positive")
        if self.nsga1_selection not in ("tournament", "proportionate"):
            raise ConfigError("nsga1 selection is 'tournament' or 'proportionate'")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        return self

    def as_dict(self) -> dict:
        d = asdict(self)
        if d["weights"] is not None:
            d["weights"] = list(d["weights"])
        return d

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass
class Population:
    """Decision vectors ``X`` and objectives ``F``; NaN rows of F are unevaluated."""

    X: np.ndarray
    F: np.ndarray

    def __len__(self) -> int:
        return self.X.shape[0]

    def take(self, idx) -> "Population":
        idx = np.asarray(idx, dtype=np.int64)
        return Population(self.X[idx].copy(), self.F[idx].copy())

    @staticmethod
    def concat(a: "Population", b: "Population") -> "Population":
        return Population(np.vstack([a.X, b.X]), np.vstack([a.F, b.F]))

    def unevaluated(self) -> np.ndarray:
        return np.flatnonzero(np.isnan(self.F).any(axis=1))


@dataclass
class Best:
    x: np.ndarray | None = None
    f: np.ndarray | None = None
    fitness: float = -np.inf


@dataclass
class RunContext:
    """Per-run state threaded through the generation functions."""

    problem: Problem
    config: RunConfig
    rng: np.random.Generator
    weights: np.ndarray
    mutation_rate: float
    best: Best = field(default_factory=Best)
    pool_X: np.ndarray | None = None
    pool_F: np.ndarray | None = None
    evaluations: int = 0

    @classmethod
    def create(cls, problem: Problem, config: RunConfig) -> "RunContext":
        w = (np.ones(problem.n_obj) if config.weights is None
             else np.asarray(config.weights, dtype=np.float64))
        if w.shape != (problem.n_obj,):
            raise ConfigError(f"{problem.n_obj} weights needed, got {w.size}")
        pm = config.mutation_rate if config.mutation_rate is not None else 1.0 / problem.n_var
        return cls(problem, config, np.random.default_rng(config.seed), w, pm)

    def fitness(self, F) -> np.ndarray:
        return self.problem.scalar_fitness(F, self.weights)

    def evaluate(self, pop: Population) -> Population:
        idx = pop.unevaluated()
        if idx.size:
            Fnew = self.problem.evaluate_batch(pop.X[idx], self.config.jobs)
            pop.F[idx] = Fnew
            self.evaluations += idx.size
            self._observe(pop.X[idx], Fnew)
        return pop

    def _observe(self, X, F) -> None:
        fit = self.fitness(F)
        i = int(np.argmax(fit))
        if fit[i] > self.best.fitness:
            self.best = Best(X[i].copy(), F[i].copy(), float(fit[i]))
        if self.pool_F is None:
            PX, PF = X, F
        else:
            PX, PF = np.vstack([self.pool_X, X]), np.vstack([self.pool_F, F])
        keep = nondominated_indices(PF)
        self.pool_X, self.pool_F = PX[keep].copy(), PF[keep].copy()


def initial_population(ctx: RunContext) -> Population:
    p = ctx.problem
    X = np.array([p.repair(random_vector(p.low, p.high, ctx.rng))
                  for _ in range(ctx.config.population)])
    F = np.full((X.shape[0], p.n_obj), np.nan)
    return Population(X, F)


def binary_tournament(keys, rng) -> int:
    """Index of the winner of one binary tournament.

    ``keys`` holds one score per member (larger wins); a 2-d array compares
    rows lexicographically.  Exact ties go to the first member drawn.
    """
    keys = np.asarray(keys)
    n = keys.shape[0]
    if n == 0:
        raise ValueError("empty population")
    i = int(rng.integers(n))
    j = int(rng.integers(n))
    a, b = keys[i], keys[j]
    if keys.ndim == 1:
        return j if b > a else i
    return j if tuple(b) > tuple(a) else i


def proportionate_pick(weights, rng) -> int:
    w = np.asarray(weights, dtype=np.float64)
    total = w.sum()
    if not total > 0:
        return int(rng.integers(w.size))
    return int(np.searchsorted(np.cumsum(w), rng.random() * total, side="right").clip(0, w.size - 1))


def make_offspring(ctx: RunContext, X, pick, n: int) -> Population:
    """``n`` repaired children from parents chosen by ``pick(rng) -> index``."""
    p, c = ctx.problem, ctx.config
    kids = []
    while len(kids) < n:
        a = X[pick(ctx.rng)]
        b = X[pick(ctx.rng)]
        c1, c2 = sbx_crossover(a, b, p.low, p.high, ctx.rng, c.crossover_rate, c.crossover_eta)
        for child in (c1, c2):
            child = polynomial_mutation(child, p.low, p.high, ctx.rng,
                                        ctx.mutation_rate, c.mutation_eta)
            kids.append(p.repair(child))
    X_new = np.array(kids[:n])
    return Population(X_new, np.full((n, p.n_obj), np.nan))

