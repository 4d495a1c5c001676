"""Selection, crossover and mutation operators.

Operators take a ``numpy.random.Generator`` and never touch global state.
"""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import EmptyFrontError, InfeasibleParentError, LengthMismatchError
from ..ot import emd_lp


class FrontTooSmallWarning(UserWarning):
    """Tournament fell back to sampling with replacement from a tiny front."""


def _pair(rng, n):
    if n < 2:
        return 0, 0
    i = int(rng.integers(n))
    j = int(rng.integers(n - 1))
    return i, j + (j >= i)


def _cv_key(a, b):
    worst = max(a.constraint_violation, b.constraint_violation)
    return worst, a.constraint_violation + b.constraint_violation


def wst_tournament_select(front, rng, distance=None):
    """Pick parents from two random pairs of the current front.

    When all four candidates are feasible, the pair whose signatures are
    farthest apart in Wasserstein distance wins.  Otherwise the pair with
    the smaller worst constraint violation wins (sum as the tie-break).
    Exact ties keep the first pair.  A front with fewer than two members
    is sampled with replacement and a :class:`FrontTooSmallWarning` is
    emitted.
    """
    n = len(front)
    if n == 0:
        raise EmptyFrontError("cannot select from an empty front")
    if n < 2:
        warnings.warn("front has fewer than 2 individuals", FrontTooSmallWarning, stacklevel=2)
    distance = distance or (lambda a, b: emd_lp(a, b).cost)
    p1 = _pair(rng, n)
    p2 = _pair(rng, n)
    pairs = [(front[p1[0]], front[p1[1]]), (front[p2[0]], front[p2[1]])]
    if all(ind.feasible for pair in pairs for ind in pair):
        d1 = distance(pairs[0][0].signature, pairs[0][1].signature)
        d2 = distance(pairs[1][0].signature, pairs[1][1].signature)
        return pairs[1] if d2 > d1 else pairs[0]
    k1 = _cv_key(*pairs[0])
    k2 = _cv_key(*pairs[1])
    return pairs[1] if k2 < k1 else pairs[0]


def binary_tournament(rank, crowding, rng) -> int:
    """Index of the winner of a rank-then-crowding tournament between two random members."""
    i, j = _pair(rng, len(rank))
    if rank[j] < rank[i] or (rank[j] == rank[i] and crowding[j] > crowding[i]):
        return j
    return i


def feasible_by_design_crossover(x, y, p, rng):
    """Two children that never exceed the budget ``p``.

    Each child alternately draws unused indices from the shuffled positions
    of the ones of each parent (child one starts with ``x``, child two with
    ``y``) until ``min(p, |J u J'|)`` ones are placed.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise LengthMismatchError(f"{x.shape} vs {y.shape}")
    if x.sum() > p or y.sum() > p:
        raise InfeasibleParentError(f"parent exceeds budget p={p}")
    jx = np.flatnonzero(x)
    jy = np.flatnonzero(y)
    target = min(p, len(set(jx.tolist()) | set(jy.tolist())))
    children = []
    for first, second in ((jx, jy), (jy, jx)):
        pools = [rng.permutation(first).tolist(), rng.permutation(second).tolist()]
        taken = set()
        turn = 0
        while len(taken) < target:
            pool = pools[turn] if pools[turn] else pools[1 - turn]
            idx = pool.pop(0)
            taken.add(int(idx))
            turn = 1 - turn
        child = np.zeros_like(x)
        child[sorted(taken)] = 1
        children.append(child)
    return children[0], children[1]


def one_point_crossover(x, y, rng, cut=None):
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise LengthMismatchError(f"{x.shape} vs {y.shape}")
    n = len(x)
    if cut is None:
        cut = int(rng.integers(1, n)) if n > 1 else 0
    c1 = np.concatenate([x[:cut], y[cut:]])
    c2 = np.concatenate([y[:cut], x[cut:]])
    return c1, c2


def bitflip_mutation(x, prob, rng, rate=None):
    """With probability ``prob`` mutate ``x``, flipping each bit with ``rate`` (default 1/len)."""
    x = np.array(x, copy=True)
    if prob <= 0 or rng.random() >= prob:
        return x
    rate = 1.0 / len(x) if rate is None else rate
    flips = rng.random(len(x)) < rate
    x[flips] = 1 - x[flips]
    return x


def sbx_crossover(a, b, eta, bounds, rng, prob_var=0.5):
    """Bounded simulated binary crossover on real vectors.

    ``bounds`` is ``(low, high)`` (scalars or arrays).  Each variable is
    recombined with probability ``prob_var``; the two children swap genes
    with probability one half, as in Deb's reference implementation.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatchError(f"{a.shape} vs {b.shape}")
    low = np.broadcast_to(np.asarray(bounds[0], dtype=float), a.shape)
    high = np.broadcast_to(np.asarray(bounds[1], dtype=float), a.shape)
    c1 = a.copy()
    c2 = b.copy()
    u_do = rng.random(a.shape)
    u_beta = rng.random(a.shape)
    u_swap = rng.random(a.shape)
    for idx in np.ndindex(a.shape):
        if u_do[idx] > prob_var:
            continue
        y1, y2 = min(a[idx], b[idx]), max(a[idx], b[idx])
        if y2 - y1 < 1e-14:
            continue
        lo, hi = low[idx], high[idx]
        r = u_beta[idx]

        beta = 1.0 + 2.0 * (y1 - lo) / (y2 - y1)
        alpha = 2.0 - beta ** -(eta + 1.0)
        beta_q = _beta_q(r, alpha, eta)
        v1 = 0.5 * ((y1 + y2) - beta_q * (y2 - y1))

        beta = 1.0 + 2.0 * (hi - y2) / (y2 - y1)
        alpha = 2.0 - beta ** -(eta + 1.0)
        beta_q = _beta_q(r, alpha, eta)
        v2 = 0.5 * ((y1 + y2) + beta_q * (y2 - y1))

        v1 = min(max(v1, lo), hi)
        v2 = min(max(v2, lo), hi)
        if u_swap[idx] < 0.5:
            v1, v2 = v2, v1
        c1[idx], c2[idx] = v1, v2
    return c1, c2


def _beta_q(r, alpha, eta):
    if r <= 1.0 / alpha:
        return (r * alpha) ** (1.0 / (eta + 1.0))
    return (1.0 / (2.0 - r * alpha)) ** (1.0 / (eta + 1.0))


def reverse_segment(x, start, stop):
    """Copy of ``x`` with ``x[start:stop]`` reversed."""
    x = np.array(x, copy=True)
    x[start:stop] = x[start:stop][::-1]
    return x


def inversion_mutation(perm, rng):
    """Reverse one random contiguous segment of every row."""
    perm = np.array(perm, copy=True)
    rows = perm if perm.ndim == 2 else perm[None, :]
    n = rows.shape[1]
    for r in range(rows.shape[0]):
        if n < 2:
            continue
        i, j = sorted(rng.choice(n + 1, size=2, replace=False))
        rows[r, i:j] = rows[r, i:j][::-1]
    return perm
