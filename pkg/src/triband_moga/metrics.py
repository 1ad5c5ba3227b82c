"""Quality indicators and run statistics."""

from __future__ import annotations

import numpy as np

from . import kernels
from .dominance import nondominated_indices
from .genome import FixedDesign

SIZE_REDUCTION_DEFINITION = (
    "100 * (Ws*Ls - Wg*Lg) / (Ws*Ls): ground footprint against the reference substrate"
)


def _point_set(A, what: str) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A[None, :]
    if A.shape[0] == 0:
        raise ValueError(f"{what} is empty")
    return A


def gd(A, ref) -> float:
    """Generational distance, ``sqrt(sum d_i^2) / |A|`` with d_i from A to ref."""
    A = _point_set(A, "approximation set")
    P = _point_set(ref, "reference front")
    d = kernels.nearest_distances(A, P)
    return float(np.sqrt(np.sum(d * d)) / A.shape[0])


def igd(A, ref) -> float:
    """Inverted generational distance, ``sqrt(sum d_i^2) / |ref|`` with d_i from ref to A."""
    A = _point_set(A, "approximation set")
    P = _point_set(ref, "reference front")
    d = kernels.nearest_distances(P, A)
    return float(np.sqrt(np.sum(d * d)) / P.shape[0])


def convergence_speed(best_fitness) -> np.ndarray:
    """Relative change of the best fitness, one value per generation from the second on."""
    b = np.asarray(best_fitness, dtype=np.float64)
    if b.size < 2:
        raise ValueError("need at least two generations")
    prev = b[:-1]
    return np.abs(b[1:] - prev) / np.maximum(1.0, np.abs(prev))


def population_diversity(X) -> float:
    """Mean over genes of the population standard deviation (ddof=0)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] == 0:
        raise ValueError("empty population")
    return float(np.mean(np.std(X, axis=0)))


def size_reduction(genome, fixed: FixedDesign = FixedDesign()) -> float:
    """Footprint reduction in percent; see ``SIZE_REDUCTION_DEFINITION``."""
    g = genome.to_array() if hasattr(genome, "to_array") else np.asarray(genome, dtype=float)
    base = fixed.Ws * fixed.Ls
    return float(100.0 * (base - g[6] * g[7]) / base)


def pooled_front(point_sets) -> np.ndarray:
    """Non-dominated union of several objective sets, deduplicated and sorted.

    The result does not depend on the order of ``point_sets``.
    """
    sets = [np.atleast_2d(np.asarray(s, dtype=np.float64)) for s in point_sets if len(s)]
    if not sets:
        raise ValueError("no points to pool")
    allp = np.unique(np.vstack(sets), axis=0)
    return allp[nondominated_indices(allp)]
