"""Optimisation engines: PGA, NSGA-I, NSGA-II, NSGA-III, SPEA and the weighted-sum GA."""

from .base import (
    ALGORITHMS,
    Best,
    ConfigError,
    Population,
    RunConfig,
    RunContext,
    binary_tournament,
    initial_population,
    make_offspring,
)
from .nsga1 import nsga1_generation
from .nsga2 import crowded_keys, nsga2_generation, nsga2_survivors, rank_and_crowding
from .nsga3 import nsga3_generation, reference_points
from .pga import pga_fitness, pga_generation
from .runner import GenerationTrace, RunAborted, RunResult, finalize_trace, run
from .scalar import scalar_generation, scalarize, update_best
from .spea import spea_fitness, spea_generation, truncate_archive, update_archive

__all__ = [
    "ALGORITHMS", "Best", "ConfigError", "Population", "RunConfig", "RunContext",
    "binary_tournament", "initial_population", "make_offspring",
    "nsga1_generation", "crowded_keys", "nsga2_generation", "nsga2_survivors",
    "rank_and_crowding", "nsga3_generation", "reference_points", "pga_fitness",
    "pga_generation", "GenerationTrace", "RunAborted", "RunResult", "finalize_trace",
    "run", "scalar_generation", "scalarize", "update_best", "spea_fitness",
    "spea_generation", "truncate_archive", "update_archive",
]
