"""Dominance, non-dominated sorting, crowding, indicators and scalarizations.

Everything here assumes minimization of every objective.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import (
    DimensionMismatchError,
    EmptyFrontError,
    NTooSmallError,
    UnsupportedDimensionError,
)


def dominates(u, v) -> bool:
    """True iff ``u`` is no worse than ``v`` everywhere and strictly better somewhere."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"{u.shape} vs {v.shape}")
    return bool(np.all(u <= v) and np.any(u < v))


def weakly_dominates(u, v) -> bool:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"{u.shape} vs {v.shape}")
    return bool(np.all(u <= v))


def _domination_matrix(F):
    # dom[i, j] is True when row i dominates row j
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


def non_dominated_sort(F) -> list:
    """Fast non-dominated sorting.

    Returns fronts as lists of row indices, ascending within each front.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim != 2:
        raise DimensionMismatchError("objectives must be a 2-D array")
    n = len(F)
    if n == 0:
        return []
    dom = _domination_matrix(F)
    count = dom.sum(axis=0)
    fronts = []
    current = np.flatnonzero(count == 0)
    while current.size:
        fronts.append([int(i) for i in current])
        count = count - dom[current].sum(axis=0)
        count[current] = -1
        current = np.flatnonzero(count == 0)
    return fronts


def non_dominated_mask(F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if len(F) == 0:
        return np.zeros(0, dtype=bool)
    return ~_domination_matrix(F).any(axis=0)


def crowding_distance(F) -> np.ndarray:
    """Crowding distance within one front.

    Per objective, points are sorted, both extremes get ``inf`` and inner
    points add ``(f(next) - f(prev)) / max|f|`` over the front.  The
    objective is skipped when that normaliser is zero.
    """
    F = np.asarray(F, dtype=float)
    n = len(F)
    if n == 0:
        return np.zeros(0)
    if n <= 2:
        return np.full(n, np.inf)
    cd = np.zeros(n)
    for j in range(F.shape[1]):
        order = np.argsort(F[:, j], kind="stable")
        col = F[order, j]
        cd[order[0]] = np.inf
        cd[order[-1]] = np.inf
        scale = np.max(np.abs(col))
        if scale == 0:
            continue
        cd[order[1:-1]] += (col[2:] - col[:-2]) / scale
    return cd


def _hv2d(P, ref):
    # P already strictly inside the reference box
    if len(P) == 0:
        return 0.0
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    hv = 0.0
    best = ref[1]
    for x, y in P:
        if y < best:
            hv += (ref[0] - x) * (best - y)
            best = y
    return hv


def hypervolume(F, reference) -> float:
    """Exact hypervolume for two or three objectives.

    Points not strictly better than ``reference`` in every objective add
    nothing and are dropped.
    """
    ref = np.asarray(reference, dtype=float)
    F = np.asarray(F, dtype=float).reshape(-1, len(ref))
    m = len(ref)
    if m not in (2, 3):
        raise UnsupportedDimensionError(f"exact hypervolume implemented for m in (2, 3), got {m}")
    F = F[np.all(F < ref, axis=1)]
    if len(F) == 0:
        return 0.0
    if m == 2:
        return float(_hv2d(F, ref))
    F = F[np.argsort(F[:, 2], kind="stable")]
    hv = 0.0
    for k in range(len(F)):
        top = F[k + 1, 2] if k + 1 < len(F) else ref[2]
        depth = top - F[k, 2]
        if depth > 0:
            hv += _hv2d(F[: k + 1, :2], ref[:2]) * depth
    return float(hv)


def coverage_metric(A, B, weak=True) -> float:
    """Fraction of points of ``B`` dominated by at least one point of ``A``.

    With ``weak=True`` equality counts as dominated; with ``weak=False``
    only strict Pareto dominance does.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if len(B) == 0:
        raise EmptyFrontError("C(A, B) undefined for empty B")
    if len(A) == 0:
        return 0.0
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatchError(f"{A.shape[1]} vs {B.shape[1]} objectives")
    le = np.all(A[:, None, :] <= B[None, :, :], axis=2)
    if weak:
        hit = le
    else:
        hit = le & np.any(A[:, None, :] < B[None, :, :], axis=2)
    return float(hit.any(axis=0).mean())


def weighted_sum_scalarize(f, lam) -> float:
    f = np.asarray(f, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if f.shape != lam.shape:
        raise DimensionMismatchError(f"{f.shape} vs {lam.shape}")
    return float(lam @ f)


def chebyshev_scalarize(f, lam, z_star) -> float:
    f = np.asarray(f, dtype=float)
    lam = np.asarray(lam, dtype=float)
    z = np.asarray(z_star, dtype=float)
    if not f.shape == lam.shape == z.shape:
        raise DimensionMismatchError(f"{f.shape}, {lam.shape}, {z.shape}")
    return float(np.max(lam * np.abs(f - z)))


@dataclass
class WeightVectorSet:
    vectors: np.ndarray
    neighbors: np.ndarray
    z_star: np.ndarray

    def __len__(self):
        return len(self.vectors)


def simplex_lattice(h, m) -> np.ndarray:
    """All vectors with entries in {0, 1/h, ..., 1} summing to one, sorted."""
    pts = [
        c
        for c in itertools.product(range(h + 1), repeat=m - 1)
        if sum(c) <= h
    ]
    vecs = np.array([list(c) + [h - sum(c)] for c in pts], dtype=float) / h
    return vecs[np.lexsort(vecs.T[::-1])]


def build_weight_vectors(N, m, T) -> WeightVectorSet:
    """Evenly spread weight vectors plus their T-nearest neighbourhoods.

    Uses the largest simplex-lattice resolution giving at most N vectors, so
    for m = 3 the set can be smaller than N (N = 40 gives 36).
    """
    if m < 2:
        raise NTooSmallError("need at least two objectives")
    if N < m:
        raise NTooSmallError(f"N={N} cannot cover {m} objectives")
    h = 1
    while _lattice_size(h + 1, m) <= N:
        h += 1
    vecs = simplex_lattice(h, m)
    size = len(vecs)
    if not 1 <= T <= size:
        raise NTooSmallError(f"neighbourhood size T={T} with {size} vectors")
    d = np.linalg.norm(vecs[:, None, :] - vecs[None, :, :], axis=2)
    # stable sort keeps i first among its zero-distance ties
    neighbors = np.empty((size, T), dtype=int)
    for i in range(size):
        order = np.argsort(d[i], kind="stable")
        order = np.concatenate([[i], order[order != i]])
        neighbors[i] = order[:T]
    return WeightVectorSet(vectors=vecs, neighbors=neighbors, z_star=np.full(m, np.inf))


def _lattice_size(h, m):
    from math import comb

    return comb(h + m - 1, m - 1)
