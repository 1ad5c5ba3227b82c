"""Pareto dominance, Fonseca-Fleming ranking, non-dominated sorting, crowding.

All objectives are minimised.  Identical objective vectors never dominate
each other and always land in the same front.
"""

from __future__ import annotations

import numpy as np

from . import kernels


def dominates(a, b) -> bool:
    """True when ``a`` is no worse than ``b`` everywhere and better somewhere."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def dominator_counts(F) -> np.ndarray:
    """Number of population members dominating each row."""
    return kernels.domination_matrix(F).sum(axis=0).astype(np.int64)


def fonseca_rank(F) -> np.ndarray:
    """Rank 1 + (number of dominators) for every row of ``F``."""
    F = np.asarray(F, dtype=np.float64)
    if F.shape[0] == 0:
        raise ValueError("empty population")
    return 1 + dominator_counts(F)


def front_ranks(F) -> np.ndarray:
    """0-based front index of every row."""
    return kernels.front_ranks(F)


def fast_nondominated_sort(F) -> list[np.ndarray]:
    """Partition row indices of ``F`` into fronts F1, F2, ... (ascending indices)."""
    F = np.asarray(F, dtype=np.float64)
    if F.shape[0] == 0:
        raise ValueError("empty population")
    ranks = kernels.front_ranks(F)
    return [np.flatnonzero(ranks == r) for r in range(int(ranks.max()) + 1)]


def nondominated_indices(F) -> np.ndarray:
    F = np.asarray(F, dtype=np.float64)
    if F.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(dominator_counts(F) == 0)


def crowding_distance(F) -> np.ndarray:
    """Crowding distance of the members of one front.

    Per objective, members holding the extreme value get ``inf``; interior
    members add the gap between the nearest strictly smaller and strictly
    larger values, normalised by the objective range.  Tied values share
    the same neighbours, so duplicates get equal distances.  An objective
    with zero range contributes nothing.
    """
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    return kernels.crowding(F)


def is_mutually_nondominated(F) -> bool:
    F = np.asarray(F, dtype=np.float64)
    if F.shape[0] <= 1:
        return True
    return not kernels.domination_matrix(F).any()
