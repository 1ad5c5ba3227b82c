"""Diversity preservation: fitness sharing and reference-point niching."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from . import kernels
from .dominance import fast_nondominated_sort


@dataclass(frozen=True)
class SharingConfig:
    sigma_share: float = 0.1
    alpha: float = 1.0

    def __post_init__(self):
        if not self.sigma_share > 0:
            raise ValueError("sigma_share must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


def sharing_value(d: float, cfg: SharingConfig = SharingConfig()) -> float:
    if d < 0:
        raise ValueError("distance must be non-negative")
    if d >= cfg.sigma_share:
        return 0.0
    return 1.0 - (d / cfg.sigma_share) ** cfg.alpha


def normalize_objectives(F) -> np.ndarray:
    """Scale each objective to [0, 1] by the population min/max (flat objectives -> 0)."""
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    lo = F.min(axis=0)
    span = F.max(axis=0) - lo
    span[span <= 0] = 1.0
    return (F - lo) / span


def niche_counts(X, cfg: SharingConfig = SharingConfig()) -> np.ndarray:
    """Niche count of every row of ``X``, self term included."""
    return kernels.niche_counts(X, cfg.sigma_share, cfg.alpha)


def niche_count(i: int, X, cfg: SharingConfig = SharingConfig()) -> float:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    d = np.sqrt(((X - X[i]) ** 2).sum(axis=1))
    return float(sum(sharing_value(float(dj), cfg) for dj in d))


def shared_fitness(dummy, X, cfg: SharingConfig = SharingConfig()) -> np.ndarray:
    """Dummy fitness divided by the niche count computed among the rows of ``X``."""
    return np.asarray(dummy, dtype=np.float64) / niche_counts(X, cfg)


def front_shared_fitness(F, cfg: SharingConfig = SharingConfig(),
                         fronts: list[np.ndarray] | None = None) -> np.ndarray:
    """Front-wise dummy fitness with sharing inside each front.

    Front 1 starts from the population size; every later front starts at
    0.9 times the smallest shared value of the front before it, so any
    member of a better front outranks every member of a worse one.
    Distances are taken in objective space normalised over the whole
    population.
    """
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    Fn = normalize_objectives(F)
    if fronts is None:
        fronts = fast_nondominated_sort(F)
    out = np.empty(F.shape[0])
    dummy = float(F.shape[0])
    for front in fronts:
        vals = shared_fitness(np.full(front.size, dummy), Fn[front], cfg)
        out[front] = vals
        dummy = 0.9 * vals.min()
    return out


# --------------------------------------------------------------------------
# reference points
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReferencePointSet:
    n_obj: int
    divisions: int
    points: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]


def das_dennis(n_obj: int, divisions: int) -> ReferencePointSet:
    """Simplex lattice with ``divisions`` steps per axis, C(M+p-1, p) points."""
    if n_obj < 2:
        raise ValueError("need at least 2 objectives")
    if divisions < 1:
        raise ValueError("need at least 1 division")
    rows = []
    # stars and bars: choose M-1 bar positions among p+M-1 slots
    for bars in combinations(range(divisions + n_obj - 1), n_obj - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(divisions + n_obj - 2 - prev)
        rows.append(parts)
    pts = np.array(rows, dtype=np.float64) / divisions
    assert pts.shape[0] == comb(n_obj + divisions - 1, divisions)
    pts.setflags(write=False)
    return ReferencePointSet(n_obj, divisions, pts)


def nsga3_intercepts(T) -> np.ndarray:
    """Hyperplane intercepts of the translated objectives ``T`` (ideal at 0).

    Extreme points come from the achievement scalarising function along each
    axis.  A singular or non-positive system falls back to the per-objective
    maximum.
    """
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    m = T.shape[1]
    W = np.full((m, m), 1e-6) + np.eye(m) * (1.0 - 1e-6)
    asf = np.max(T[None, :, :] / W[:, None, :], axis=2)
    extremes = T[np.argmin(asf, axis=1)]
    fallback = T.max(axis=0)
    try:
        b = np.linalg.solve(extremes, np.ones(m))
        a = 1.0 / b
        if not np.all(np.isfinite(a)) or np.any(a <= 1e-10):
            a = fallback
    except np.linalg.LinAlgError:
        a = fallback
    a = np.where(a <= 1e-10, 1.0, a)
    return a


def perpendicular_distances(Fn, refs) -> np.ndarray:
    """Distance from each normalised point to each reference direction."""
    Fn = np.atleast_2d(Fn)
    R = np.atleast_2d(refs)
    unit = R / np.linalg.norm(R, axis=1, keepdims=True)
    proj = Fn @ unit.T
    # explicit residual; |x|^2 - proj^2 cancels badly for points on a direction
    resid = Fn[:, None, :] - proj[:, :, None] * unit[None, :, :]
    return np.sqrt((resid ** 2).sum(axis=2))


def associate(Fn, refs) -> tuple[np.ndarray, np.ndarray]:
    d = perpendicular_distances(Fn, refs)
    idx = np.argmin(d, axis=1)
    return idx, d[np.arange(d.shape[0]), idx]


def nsga3_select(F, refs: ReferencePointSet, n_select: int, rng,
                 fronts: list[np.ndarray] | None = None) -> np.ndarray:
    """Indices of the ``n_select`` survivors of the combined pool ``F``.

    Whole fronts are admitted while they fit; the front that overflows is
    filled by niching on the reference directions.
    """
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    if n_select > F.shape[0]:
        raise ValueError("pool smaller than the number to select")
    if fronts is None:
        fronts = fast_nondominated_sort(F)
    chosen: list[int] = []
    last = None
    for front in fronts:
        if len(chosen) + front.size <= n_select:
            chosen.extend(front.tolist())
            if len(chosen) == n_select:
                break
        else:
            last = front
            break
    if last is None:
        return np.array(chosen, dtype=np.int64)

    k_needed = n_select - len(chosen)
    members = np.array(chosen + last.tolist(), dtype=np.int64)
    ideal = F.min(axis=0)
    T = F[members] - ideal
    Fn = T / nsga3_intercepts(T)
    assoc, dist = associate(Fn, refs.points)
    n_done = len(chosen)
    rho = np.bincount(assoc[:n_done], minlength=len(refs)).astype(np.int64)

    last_assoc = assoc[n_done:]
    last_dist = dist[n_done:]
    taken = np.zeros(last.size, dtype=bool)
    active = np.ones(len(refs), dtype=bool)
    picks: list[int] = []
    while len(picks) < k_needed:
        cand_refs = np.flatnonzero(active)
        low = rho[cand_refs].min()
        tied = cand_refs[rho[cand_refs] == low]
        j = tied[rng.integers(tied.size)] if tied.size > 1 else tied[0]
        pool = np.flatnonzero((last_assoc == j) & ~taken)
        if pool.size == 0:
            active[j] = False
            continue
        if rho[j] == 0:
            s = pool[np.argmin(last_dist[pool])]
        else:
            s = pool[rng.integers(pool.size)]
        taken[s] = True
        picks.append(int(last[s]))
        rho[j] += 1
    return np.array(chosen + picks, dtype=np.int64)
