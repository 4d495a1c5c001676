"""Discrete optimal transport between weighted histograms.

The exact earth mover's distance is solved with a transportation simplex
(network simplex on the bipartite source/sink graph) written here, so no LP
package is needed for the hot path used by the optimizers.  The closed-form
1-D distance goes through the quantile functions and serves as an
independent check of the LP.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import (
    DimensionError,
    EmptyHistogramError,
    EmptyInputError,
    KTooLargeError,
    MassMismatchError,
    ParseError,
    SupportMismatchError,
)

MASS_TOL = 1e-9


class Histogram:
    """Weighted point masses ``sum_i w_i * delta(x - x_i)`` in R^d.

    ``support`` is stored as an ``(m, d)`` float array and ``weights`` as a
    length-``m`` array.  Zero weights are allowed, which lets histograms
    built on a fixed bin grid keep every bin.
    """

    __slots__ = ("support", "weights")

    def __init__(self, support, weights):
        support = np.asarray(support, dtype=float)
        if support.ndim == 1:
            support = support[:, None]
        weights = np.asarray(weights, dtype=float).ravel()
        if support.ndim != 2 or support.shape[1] < 1:
            raise DimensionError(f"support must be (m, d) with d >= 1, got {support.shape}")
        if len(weights) != len(support):
            raise ValueError(
                f"{len(weights)} weights for {len(support)} support points"
            )
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and nonnegative")
        self.support = support
        self.weights = weights

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self):
        return len(self.weights)

    def is_normalized(self, tol=MASS_TOL) -> bool:
        return abs(self.mass - 1.0) <= tol

    def normalized(self) -> Histogram:
        if self.mass <= 0:
            raise EmptyHistogramError("cannot normalize a histogram with zero mass")
        return Histogram(self.support, self.weights / self.mass)

    def mean(self) -> np.ndarray:
        return self.weights @ self.support / self.mass

    def same_support(self, other: Histogram) -> bool:
        return self.support.shape == other.support.shape and np.array_equal(
            self.support, other.support
        )

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return self.same_support(other) and np.array_equal(self.weights, other.weights)

    def __repr__(self):
        return f"Histogram(m={len(self)}, d={self.dim}, mass={self.mass:.6g})"


@dataclass
class TransportPlan:
    gamma: np.ndarray
    cost: float

    def marginals(self):
        return self.gamma.sum(axis=1), self.gamma.sum(axis=0)


@dataclass(frozen=True)
class Euclidean:
    """Ground distance ``||x - y||_2 ** p``; the reported distance is its p-th root."""

    p: float = 1.0

    def cost_matrix(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        diff = a[:, None, :] - b[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        return dist if self.p == 1 else dist**self.p


def _cost_and_root(p1, p2, ground):
    if ground is None:
        ground = Euclidean(1.0)
    if isinstance(ground, Euclidean):
        if p1.dim != p2.dim:
            raise DimensionError(f"dimension {p1.dim} vs {p2.dim}")
        return ground.cost_matrix(p1.support, p2.support), ground.p
    cost = np.asarray(ground, dtype=float)
    if cost.shape != (len(p1), len(p2)):
        raise DimensionError(
            f"cost matrix shape {cost.shape} does not match ({len(p1)}, {len(p2)})"
        )
    return cost, 1.0


def _check_pair(p1, p2):
    if len(p1) == 0 or len(p2) == 0:
        raise EmptyHistogramError("histograms must have at least one support point")
    if abs(p1.mass - p2.mass) > MASS_TOL:
        raise MassMismatchError(f"masses differ: {p1.mass!r} vs {p2.mass!r}")
    if p1.mass <= 0:
        raise EmptyHistogramError("histograms carry no mass")


def emd_lp(p1: Histogram, p2: Histogram, ground=None) -> TransportPlan:
    """Exact earth mover's distance and an optimal transport plan.

    ``ground`` is ``None`` (Euclidean, p=1), a :class:`Euclidean` instance, or
    a dense ``(m1, m2)`` cost matrix.  For a Euclidean ground the returned
    cost is ``(sum gamma_ij d_ij^p) ** (1/p)``; for an explicit matrix it is
    the plain linear cost.
    """
    _check_pair(p1, p2)
    cost, p = _cost_and_root(p1, p2, ground)
    a = p1.weights
    # absorb the (<= 1e-9) mass difference so the polytope is non-empty
    b = p2.weights * (p1.mass / p2.mass)

    rows = np.flatnonzero(a > 0)
    cols = np.flatnonzero(b > 0)
    sub = _transport_simplex(a[rows], b[cols], cost[np.ix_(rows, cols)])
    gamma = np.zeros((len(a), len(b)))
    gamma[np.ix_(rows, cols)] = sub
    total = float(np.sum(sub * cost[np.ix_(rows, cols)]))
    total = max(total, 0.0)
    if p != 1:
        total = total ** (1.0 / p)
    return TransportPlan(gamma=gamma, cost=total)


def wasserstein(p1: Histogram, p2: Histogram, ground=None) -> float:
    return emd_lp(p1, p2, ground).cost


def _transport_simplex(a, b, cost):
    """Transportation simplex with a spanning-tree basis.

    Starts from the north-west corner solution (always m+n-1 basic cells,
    degenerate zeros included), then pivots on the most negative reduced
    cost.  After a long run of degenerate pivots it switches to Bland's
    rule, which cannot cycle.
    """
    m, n = len(a), len(b)
    flow = np.zeros((m, n))
    if m == 1:
        flow[0] = b
        return flow
    if n == 1:
        flow[:, 0] = a
        return flow

    # adjacency of the basis tree: rows are nodes 0..m-1, columns m..m+n-1
    adj = [set() for _ in range(m + n)]
    supply = a.astype(float).copy()
    demand = b.astype(float).copy()
    i = j = 0
    while True:
        x = min(supply[i], demand[j])
        flow[i, j] = x
        adj[i].add(m + j)
        adj[m + j].add(i)
        supply[i] -= x
        demand[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif supply[i] <= demand[j]:
            i += 1
        else:
            j += 1
    if flow[m - 1, n - 1] < 0:
        flow[m - 1, n - 1] = 0.0

    scale = max(1.0, float(np.abs(cost).max()))
    tol = 1e-12 * scale
    max_iter = 50 * (m + n) ** 2 + 1000
    bland = False
    degenerate_run = 0
    u = np.empty(m)
    v = np.empty(n)
    for _ in range(max_iter):
        # dual potentials from u_i + v_j = c_ij on basic cells
        seen = [False] * (m + n)
        seen[0] = True
        u[0] = 0.0
        queue = deque([0])
        while queue:
            node = queue.popleft()
            for nb in adj[node]:
                if seen[nb]:
                    continue
                seen[nb] = True
                if node < m:
                    v[nb - m] = cost[node, nb - m] - u[node]
                else:
                    u[nb] = cost[nb, node - m] - v[node - m]
                queue.append(nb)

        reduced = cost - u[:, None] - v[None, :]
        if bland:
            candidates = np.flatnonzero(reduced.ravel() < -tol)
            if len(candidates) == 0:
                return flow
            k = int(candidates[0])
        else:
            k = int(np.argmin(reduced))
            if reduced.flat[k] >= -tol:
                return flow
        ei, ej = divmod(k, n)

        # unique tree path from column ej back to row ei
        parent = {m + ej: None}
        queue = deque([m + ej])
        while queue:
            node = queue.popleft()
            if node == ei:
                break
            for nb in adj[node]:
                if nb not in parent:
                    parent[nb] = node
                    queue.append(nb)
        path = []
        node = ei
        while parent[node] is not None:
            path.append(node)
            node = parent[node]
        path.append(m + ej)
        path.reverse()  # m+ej, r1, c1, ..., ei

        cells = []
        for t in range(len(path) - 1):
            x, y = path[t], path[t + 1]
            r, c = (x, y - m) if x < m else (y, x - m)
            cells.append((r, c))
        minus = cells[0::2]
        plus = cells[1::2]

        theta = np.inf
        leave = None
        for r, c in minus:
            f = flow[r, c]
            if f < theta or (bland and f == theta and (r, c) < leave):
                theta = f
                leave = (r, c)
        theta = max(theta, 0.0)

        for r, c in minus:
            flow[r, c] -= theta
        for r, c in plus:
            flow[r, c] += theta
        flow[ei, ej] += theta
        lr, lc = leave
        flow[lr, lc] = 0.0
        adj[lr].discard(m + lc)
        adj[m + lc].discard(lr)
        adj[ei].add(m + ej)
        adj[m + ej].add(ei)

        if theta == 0.0:
            degenerate_run += 1
            if degenerate_run > 2 * (m + n):
                bland = True
        else:
            degenerate_run = 0
    raise RuntimeError("transportation simplex did not converge")


def wasserstein_1d(p1: Histogram, p2: Histogram, p_exp: float = 1.0) -> float:
    """W_p between two histograms on the real line via their quantile functions."""
    if p1.dim != 1 or p2.dim != 1:
        raise DimensionError("wasserstein_1d needs scalar supports")
    _check_pair(p1, p2)
    x1, w1 = _sorted_1d(p1)
    x2, w2 = _sorted_1d(p2)
    c1 = np.cumsum(w1)
    c2 = np.cumsum(w2)
    total = min(c1[-1], c2[-1])
    cuts = np.union1d(c1, c2)
    cuts = cuts[cuts < total]
    ts = np.concatenate([[0.0], cuts, [total]])
    widths = np.diff(ts)
    mids = 0.5 * (ts[:-1] + ts[1:])
    q1 = x1[np.minimum(np.searchsorted(c1, mids), len(x1) - 1)]
    q2 = x2[np.minimum(np.searchsorted(c2, mids), len(x2) - 1)]
    gaps = np.abs(q1 - q2)
    if p_exp != 1:
        gaps = gaps**p_exp
    value = float(np.sum(widths * gaps))
    return value if p_exp == 1 else value ** (1.0 / p_exp)


def _sorted_1d(h):
    x = h.support[:, 0]
    order = np.argsort(x, kind="stable")
    return x[order], h.weights[order]


def barycenter_fixed_support(ps, lambdas=None, ground=None) -> Histogram:
    """Wasserstein barycenter restricted to the support shared by ``ps``.

    Solves one LP over all transport plans together with the free
    barycenter weights, minimising ``sum_k lambda_k <C, gamma_k>``.  The
    default ground cost is squared Euclidean (``Euclidean(2)``): with p=1
    the barycenter of two separated point masses is not unique.
    """
    ps = list(ps)
    if not ps:
        raise EmptyInputError("need at least one histogram")
    base = ps[0]
    for h in ps[1:]:
        if not base.same_support(h):
            raise SupportMismatchError("all histograms must share one support")
    n_hist = len(ps)
    if lambdas is None:
        lambdas = np.full(n_hist, 1.0 / n_hist)
    lambdas = np.asarray(lambdas, dtype=float)
    if len(lambdas) != n_hist:
        raise ValueError("one lambda per histogram")
    if np.any(lambdas < 0) or abs(lambdas.sum() - 1.0) > MASS_TOL:
        raise ValueError("lambdas must be nonnegative and sum to 1")
    for h in ps:
        if not h.is_normalized():
            raise MassMismatchError("barycenter inputs must be normalized")
    if n_hist == 1:
        return Histogram(base.support, base.weights.copy())
    if all(np.array_equal(h.weights, base.weights) for h in ps[1:]):
        return Histogram(base.support, base.weights.copy())

    ground = Euclidean(2.0) if ground is None else ground
    cost, _ = _cost_and_root(base, base, ground)
    m = len(base)
    mm = m * m
    n_var = n_hist * mm + m
    c = np.zeros(n_var)
    for k in range(n_hist):
        c[k * mm : (k + 1) * mm] = lambdas[k] * cost.ravel()

    # gamma_k[i, :] sums to the barycenter weight b_i; gamma_k[:, j] sums to w_k[j]
    row_sum = sparse.kron(sparse.eye(m), np.ones((1, m)))
    col_sum = sparse.kron(np.ones((1, m)), sparse.eye(m))
    blocks_eq = []
    rhs = []
    for k in range(n_hist):
        left = [None] * n_hist
        left[k] = row_sum
        blocks_eq.append(left + [-sparse.eye(m)])
        rhs.append(np.zeros(m))
        left = [None] * n_hist
        left[k] = col_sum
        blocks_eq.append(left + [sparse.csr_matrix((m, m))])
        rhs.append(ps[k].weights)
    a_eq = sparse.bmat(blocks_eq, format="csr")
    b_eq = np.concatenate(rhs)
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"barycenter LP failed: {res.message}")
    w = np.clip(res.x[-m:], 0.0, None)
    return Histogram(base.support, w / w.sum())


@dataclass
class WstKMeansResult:
    labels: list
    barycenters: list
    objective_history: list
    n_iter: int


def wst_kmeans(ps, k, max_iter=100, seed=0, ground=None) -> WstKMeansResult:
    """k-means in Wasserstein space with fixed-support barycenters as centroids.

    Initial barycenters are ``k`` distinct inputs drawn with ``seed``.  The
    objective is the summed transport cost (``W_p ** p``) of every input to
    its cluster barycenter, which both steps can only decrease.  Exact ties
    in the assignment go to the lowest cluster index.
    """
    ps = list(ps)
    n = len(ps)
    if n == 0:
        raise EmptyInputError("need at least one histogram")
    if k < 1 or k > n:
        raise KTooLargeError(f"k={k} with {n} histograms")
    for h in ps[1:]:
        if not ps[0].same_support(h):
            raise SupportMismatchError("all histograms must share one support")
    ground = Euclidean(2.0) if ground is None else ground
    cost, _ = _cost_and_root(ps[0], ps[0], ground)

    rng = np.random.default_rng(seed)
    init = rng.choice(n, size=k, replace=False)
    centers = [Histogram(ps[i].support, ps[i].weights.copy()) for i in init]
    labels = None
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        dist = np.array(
            [[emd_lp(c, h, cost).cost for c in centers] for h in ps]
        )
        new_labels = [int(np.argmin(row)) for row in dist]
        history.append(float(sum(dist[i, new_labels[i]] for i in range(n))))
        if new_labels == labels:
            break
        labels = new_labels
        for c_idx in range(k):
            members = [ps[i] for i in range(n) if labels[i] == c_idx]
            if members:
                centers[c_idx] = barycenter_fixed_support(members, ground=ground)
    return WstKMeansResult(labels=labels, barycenters=centers, objective_history=history, n_iter=n_iter)


def _shared_weights(p, q):
    if not p.same_support(q):
        raise SupportMismatchError("divergences need a shared support")
    return p.weights, q.weights


def kl_divergence(p: Histogram, q: Histogram) -> float:
    """KL(p | (p+q)/2) in bits; finite for any pair on a shared support."""
    wp, wq = _shared_weights(p, q)
    mix = 0.5 * (wp + wq)
    mask = wp > 0
    return float(np.sum(wp[mask] * np.log2(wp[mask] / mix[mask])))


def js_divergence(p: Histogram, q: Histogram) -> float:
    return 0.5 * kl_divergence(p, q) + 0.5 * kl_divergence(q, p)


def js_metric(p: Histogram, q: Histogram) -> float:
    return float(np.sqrt(min(max(js_divergence(p, q), 0.0), 1.0)))


def read_histogram_csv(path) -> Histogram:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty histogram file", line=1) from None
        if len(header) < 2 or header[-1].strip() != "weight":
            raise ParseError("header must be coord_1,...,coord_d,weight", line=1)
        d = len(header) - 1
        pts, ws = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != d + 1:
                raise ParseError(f"expected {d + 1} fields, got {len(row)}", line=lineno)
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(f"not a number: {cell!r}", line=lineno, column=col) from None
            pts.append(vals[:-1])
            ws.append(vals[-1])
    if not pts:
        raise EmptyHistogramError(f"{path} has no support points")
    return Histogram(np.array(pts), np.array(ws))


def write_histogram_csv(h: Histogram, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"coord_{i + 1}" for i in range(h.dim)] + ["weight"])
        for x, wt in zip(h.support, h.weights):
            w.writerow([repr(float(v)) for v in x] + [repr(float(wt))])
