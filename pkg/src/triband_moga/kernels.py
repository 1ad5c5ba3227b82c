"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` loop version and a vectorised
numpy version with identical semantics.  The public names dispatch on
``_accel.USE_NUMBA``; both variants stay importable (``*_numba`` /
``*_numpy``) so tests and ``benchmarks/bench_kernels.py`` can compare them.

All objective arrays are ``(n_points, n_obj)`` float64, minimisation.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import _accel
from ._accel import njit

# --------------------------------------------------------------------------
# dominance
# --------------------------------------------------------------------------


@njit(cache=True)
def _domination_matrix_numba(F):
    n, m = F.shape
    D = np.zeros((n, n), dtype=np.bool_)
    for i in range(n):
        for j in range(i + 1, n):
            i_better = False
            j_better = False
            for k in range(m):
                if F[i, k] < F[j, k]:
                    i_better = True
                elif F[j, k] < F[i, k]:
                    j_better = True
                if i_better and j_better:
                    break
            if i_better and not j_better:
                D[i, j] = True
            elif j_better and not i_better:
                D[j, i] = True
    return D


def _domination_matrix_numpy(F):
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


@njit(cache=True)
def _front_ranks_numba(F):
    n = F.shape[0]
    D = _domination_matrix_numba(F)
    count = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if D[j, i]:
                count[i] += 1
    ranks = np.full(n, -1, dtype=np.int64)
    current = np.empty(n, dtype=np.int64)
    n_cur = 0
    for i in range(n):
        if count[i] == 0:
            ranks[i] = 0
            current[n_cur] = i
            n_cur += 1
    level = 0
    nxt = np.empty(n, dtype=np.int64)
    while n_cur > 0:
        n_nxt = 0
        for a in range(n_cur):
            p = current[a]
            for q in range(n):
                if D[p, q]:
                    count[q] -= 1
                    if count[q] == 0:
                        ranks[q] = level + 1
                        nxt[n_nxt] = q
                        n_nxt += 1
        level += 1
        for a in range(n_nxt):
            current[a] = nxt[a]
        n_cur = n_nxt
    return ranks


def _front_ranks_numpy(F):
    n = F.shape[0]
    D = _domination_matrix_numpy(F)
    count = D.sum(axis=0).astype(np.int64)
    ranks = np.full(n, -1, dtype=np.int64)
    current = np.flatnonzero(count == 0)
    level = 0
    while current.size:
        ranks[current] = level
        count -= D[current].sum(axis=0)
        count[current] = -1
        current = np.flatnonzero(count == 0)
        level += 1
    return ranks


# --------------------------------------------------------------------------
# crowding distance (one front)
# --------------------------------------------------------------------------


@njit(cache=True)
def _crowding_numba(F):
    n, m = F.shape
    dist = np.zeros(n, dtype=np.float64)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        col = F[:, k].copy()
        order = np.argsort(col, kind="mergesort")
        lo = col[order[0]]
        hi = col[order[n - 1]]
        span = hi - lo
        if span <= 0.0:
            continue
        # start index of the tie-group each sorted position belongs to
        start = np.empty(n, dtype=np.int64)
        end = np.empty(n, dtype=np.int64)
        s = 0
        for a in range(1, n + 1):
            if a == n or col[order[a]] != col[order[s]]:
                for b in range(s, a):
                    start[b] = s
                    end[b] = a - 1
                s = a
        for a in range(n):
            i = order[a]
            if start[a] == 0 or end[a] == n - 1:
                dist[i] = np.inf
            else:
                below = col[order[start[a] - 1]]
                above = col[order[end[a] + 1]]
                dist[i] += (above - below) / span
    return dist


def _crowding_numpy(F):
    n, m = F.shape
    dist = np.zeros(n, dtype=np.float64)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        col = F[:, k]
        uniq, inv = np.unique(col, return_inverse=True)
        span = uniq[-1] - uniq[0]
        if span <= 0.0:
            continue
        inv = inv.ravel()
        boundary = (inv == 0) | (inv == uniq.size - 1)
        interior = ~boundary
        gap = np.zeros(n)
        gap[interior] = (uniq[inv[interior] + 1] - uniq[inv[interior] - 1]) / span
        dist = dist + gap
        dist[boundary] = np.inf
    return dist


# --------------------------------------------------------------------------
# distances
# --------------------------------------------------------------------------


@njit(cache=True)
def _nearest_distances_numba(A, B):
    na, m = A.shape
    nb = B.shape[0]
    out = np.empty(na, dtype=np.float64)
    for i in range(na):
        best = np.inf
        for j in range(nb):
            s = 0.0
            for k in range(m):
                d = A[i, k] - B[j, k]
                s += d * d
            if s < best:
                best = s
        out[i] = np.sqrt(best)
    return out


def _nearest_distances_numpy(A, B, chunk=2048):
    out = np.empty(A.shape[0], dtype=np.float64)
    for s in range(0, A.shape[0], chunk):
        diff = A[s:s + chunk, None, :] - B[None, :, :]
        sq = np.zeros(diff.shape[:2])
        # explicit per-axis accumulation keeps the summation order of the loop kernel
        for k in range(A.shape[1]):
            sq += diff[:, :, k] * diff[:, :, k]
        out[s:s + chunk] = np.sqrt(sq.min(axis=1))
    return out


@njit(cache=True)
def _niche_counts_numba(X, sigma, alpha):
    n, m = X.shape
    counts = np.zeros(n, dtype=np.float64)
    for i in range(n):
        total = 0.0
        for j in range(n):
            s = 0.0
            for k in range(m):
                d = X[i, k] - X[j, k]
                s += d * d
            d = np.sqrt(s)
            if d < sigma:
                r = d / sigma
                # numpy's ** takes these fast paths; libm pow can differ by an ulp
                if alpha == 1.0:
                    p = r
                elif alpha == 2.0:
                    p = r * r
                else:
                    p = r ** alpha
                total += 1.0 - p
        counts[i] = total
    return counts


def _niche_counts_numpy(X, sigma, alpha):
    diff = X[:, None, :] - X[None, :, :]
    sq = np.zeros(diff.shape[:2])
    for k in range(X.shape[1]):
        sq += diff[:, :, k] * diff[:, :, k]
    d = np.sqrt(sq)
    near = d < sigma
    r = d[near] / sigma
    if alpha in (1.0, 2.0):
        p = r ** alpha
    else:
        # libm pow, as in the loop kernel; numpy's vectorised pow differs by an ulp
        p = np.fromiter(map(math.pow, r, itertools.repeat(alpha)), float, r.size)
    sh = np.zeros_like(d)
    sh[near] = 1.0 - p
    # cumsum adds left to right like the loop kernel; sum() would pair terms
    return np.cumsum(sh, axis=1)[:, -1] if sh.shape[1] else np.zeros(sh.shape[0])


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------


def _as2d(F) -> np.ndarray:
    F = np.ascontiguousarray(F, dtype=np.float64)
    if F.ndim != 2:
        raise ValueError(f"expected a 2-d objective array, got shape {F.shape}")
    return F


def domination_matrix(F) -> np.ndarray:
    """Boolean matrix ``D`` with ``D[i, j]`` true when row i dominates row j."""
    F = _as2d(F)
    if _accel.USE_NUMBA:
        return _domination_matrix_numba(F)
    return _domination_matrix_numpy(F)


def front_ranks(F) -> np.ndarray:
    """0-based non-domination level of every row (fast non-dominated sort)."""
    F = _as2d(F)
    if F.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    if _accel.USE_NUMBA:
        return _front_ranks_numba(F)
    return _front_ranks_numpy(F)


def crowding(F) -> np.ndarray:
    F = _as2d(F)
    if _accel.USE_NUMBA:
        return _crowding_numba(F)
    return _crowding_numpy(F)


def nearest_distances(A, B) -> np.ndarray:
    """Euclidean distance from each row of ``A`` to its nearest row of ``B``."""
    A = _as2d(A)
    B = _as2d(B)
    if A.shape[1] != B.shape[1]:
        raise ValueError("point sets differ in dimension")
    if _accel.USE_NUMBA:
        return _nearest_distances_numba(A, B)
    return _nearest_distances_numpy(A, B)


def niche_counts(X, sigma: float, alpha: float) -> np.ndarray:
    X = _as2d(X)
    if _accel.USE_NUMBA:
        return _niche_counts_numba(X, float(sigma), float(alpha))
    return _niche_counts_numpy(X, float(sigma), float(alpha))
