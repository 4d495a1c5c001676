"""Undirected graphs, hop-distance distributions and resilience metrics.

All distance-based quantities use hop counts; edge weights only matter for
spectral clustering and for travel times in the sensor-placement proxy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path
from sklearn.cluster import KMeans

from .errors import (
    DuplicateEdgeError,
    EmptyGraphError,
    KTooLargeError,
    NodeOutOfRangeError,
    ParseError,
    SelfLoopError,
    UnknownEdgeError,
)
from .ot import Histogram, js_metric, wasserstein_1d


def _edge_key(u, v):
    return (u, v) if u < v else (v, u)


class NetworkGraph:
    """Simple undirected graph on nodes ``0..n-1`` with optional positive weights."""

    def __init__(self, n, edges=()):
        if n < 0:
            raise ValueError("node count must be nonnegative")
        self.n = int(n)
        self._weights = {}
        self._order = []
        self._adj = [[] for _ in range(self.n)]
        for e in edges:
            if len(e) == 2:
                self.add_edge(e[0], e[1])
            else:
                self.add_edge(e[0], e[1], e[2])

    def add_edge(self, u, v, weight=None):
        u, v = int(u), int(v)
        for x in (u, v):
            if not 0 <= x < self.n:
                raise NodeOutOfRangeError(f"node {x} outside [0, {self.n})")
        if u == v:
            raise SelfLoopError(f"self-loop at node {u}")
        key = _edge_key(u, v)
        if key in self._weights:
            raise DuplicateEdgeError(f"duplicate edge {key}")
        if weight is not None and not weight > 0:
            raise ValueError(f"edge weight must be positive, got {weight}")
        self._weights[key] = None if weight is None else float(weight)
        self._order.append(key)
        self._adj[u].append(v)
        self._adj[v].append(u)

    @property
    def edges(self):
        """Edges as ``(u, v)`` with ``u < v`` in insertion order."""
        return list(self._order)

    @property
    def m(self):
        return len(self._order)

    def weight(self, u, v, default=1.0):
        w = self._weights[_edge_key(u, v)]
        return default if w is None else w

    def has_edge(self, u, v):
        return _edge_key(u, v) in self._weights

    def neighbors(self, u):
        return list(self._adj[u])

    def degree(self, u):
        return len(self._adj[u])

    def is_weighted(self):
        return any(w is not None for w in self._weights.values())

    def without_edges(self, removed) -> NetworkGraph:
        drop = set()
        for u, v in removed:
            key = _edge_key(int(u), int(v))
            if key not in self._weights:
                raise UnknownEdgeError(f"edge {key} not in graph")
            drop.add(key)
        g = NetworkGraph(self.n)
        for key in self._order:
            if key not in drop:
                g.add_edge(key[0], key[1], self._weights[key])
        return g

    def without_node(self, node) -> NetworkGraph:
        """Induced subgraph on the other n-1 nodes, relabelled in order."""
        if not 0 <= node < self.n:
            raise NodeOutOfRangeError(f"node {node} outside [0, {self.n})")
        g = NetworkGraph(self.n - 1)
        for u, v in self._order:
            if node in (u, v):
                continue
            g.add_edge(u - (u > node), v - (v > node), self._weights[(u, v)])
        return g

    def adjacency(self, weighted=False) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for (u, v), w in self._weights.items():
            val = (1.0 if w is None else w) if weighted else 1.0
            a[u, v] = a[v, u] = val
        return a

    def hop_distances(self) -> np.ndarray:
        """All-pairs hop counts; ``inf`` for unreachable pairs."""
        if self.n == 0:
            return np.zeros((0, 0))
        if self.m == 0:
            d = np.full((self.n, self.n), np.inf)
            np.fill_diagonal(d, 0.0)
            return d
        u, v = np.array(self._order).T
        mat = csr_matrix((np.ones(self.m), (u, v)), shape=(self.n, self.n))
        return shortest_path(mat, directed=False, unweighted=True)

    def __repr__(self):
        return f"NetworkGraph(n={self.n}, m={self.m})"


def load_graph(path) -> NetworkGraph:
    """Read an edge-list CSV of ``u,v[,weight]`` rows; n is the largest id plus one.

    A first row that does not parse as integers is treated as a header.
    """
    rows = []
    with Path(path).open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(not c for c in cells) or cells[0].startswith("#"):
                continue
            if len(cells) not in (2, 3):
                raise ParseError(f"expected 2 or 3 fields, got {len(cells)}", line=lineno)
            try:
                u, v = int(cells[0]), int(cells[1])
            except ValueError:
                if lineno == 1 and not rows:
                    continue
                raise ParseError(f"node ids must be integers: {row}", line=lineno) from None
            w = None
            if len(cells) == 3 and cells[2]:
                try:
                    w = float(cells[2])
                except ValueError:
                    raise ParseError(f"bad weight {cells[2]!r}", line=lineno, column=3) from None
            if u < 0 or v < 0:
                raise ParseError("node ids must be nonnegative", line=lineno)
            rows.append((lineno, u, v, w))
    n = max((max(u, v) for _, u, v, _ in rows), default=-1) + 1
    g = NetworkGraph(n)
    for lineno, u, v, w in rows:
        try:
            g.add_edge(u, v, w)
        except (SelfLoopError, DuplicateEdgeError) as exc:
            exc.args = (f"line {lineno}: {exc}",)
            raise
    return g


def write_graph(g: NetworkGraph, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for u, v in g.edges:
            wt = g._weights[(u, v)]
            w.writerow([u, v] if wt is None else [u, v, repr(wt)])


def _distribution_from_counts(counts, n, support_max):
    support = np.arange(1, support_max + 1, dtype=float)
    weights = np.zeros(support_max)
    k = min(len(counts), support_max)
    weights[:k] = counts[:k]
    return Histogram(support, weights / (n - 1))


def node_distance_distribution(g: NetworkGraph, i: int, dist=None) -> Histogram:
    """Fraction of the other n-1 nodes at hop distance k, for k = 1..D(G).

    Unreachable nodes fall outside every bin, so the mass is below one on a
    disconnected graph.
    """
    if not 0 <= i < g.n:
        raise NodeOutOfRangeError(f"node {i} outside [0, {g.n})")
    if g.n < 2:
        raise EmptyGraphError("distance distributions need at least two nodes")
    dist = g.hop_distances() if dist is None else dist
    diameter = _diameter(dist)
    row = dist[i]
    finite = row[np.isfinite(row) & (row > 0)].astype(int)
    counts = np.bincount(finite, minlength=diameter + 1)[1:]
    return _distribution_from_counts(counts, g.n, max(diameter, 1))


def graph_distance_distribution(g: NetworkGraph, dist=None, support_max=None) -> Histogram:
    """Mean of the node distance distributions over all nodes."""
    if g.n < 2:
        raise EmptyGraphError("distance distributions need at least two nodes")
    dist = g.hop_distances() if dist is None else dist
    diameter = max(_diameter(dist), 1)
    support_max = diameter if support_max is None else max(support_max, diameter)
    total = np.zeros(support_max)
    for i in range(g.n):
        row = dist[i]
        finite = row[np.isfinite(row) & (row > 0)].astype(int)
        counts = np.bincount(finite, minlength=support_max + 1)[1 : support_max + 1]
        total += counts / (g.n - 1)
    return Histogram(np.arange(1, support_max + 1, dtype=float), total / g.n)


def _diameter(dist):
    off = dist[~np.eye(len(dist), dtype=bool)]
    finite = off[np.isfinite(off)]
    return int(finite.max()) if finite.size else 0


def efficiency(g: NetworkGraph, dist=None) -> float:
    """Mean inverse hop distance over ordered pairs; unreachable pairs add 0."""
    if g.n < 2:
        return 0.0
    dist = g.hop_distances() if dist is None else dist
    off = ~np.eye(g.n, dtype=bool)
    with np.errstate(divide="ignore"):
        inv = np.where(np.isfinite(dist) & off, 1.0 / np.where(off, dist, 1.0), 0.0)
    return float(inv.sum() / (g.n * (g.n - 1)))


def betweenness(g: NetworkGraph, dist=None) -> np.ndarray:
    """Per-node count of ordered pairs (s, t) with the node strictly inside
    some shortest s-t path, divided by n**2."""
    n = g.n
    dist = g.hop_distances() if dist is None else dist
    b = np.zeros(n)
    reach = np.isfinite(dist)
    for i in range(n):
        through = dist[:, i][:, None] + dist[i, :][None, :]
        on_path = reach & (through == dist)
        on_path[i, :] = False
        on_path[:, i] = False
        np.fill_diagonal(on_path, False)
        b[i] = on_path.sum()
    return b / n**2


def clustering_coefficient(g: NetworkGraph) -> float:
    """3 x triangles / connected triples (each triangle closes three triples)."""
    triples = sum(g.degree(u) * (g.degree(u) - 1) // 2 for u in range(g.n))
    if triples == 0:
        return 0.0
    nbrs = [set(g.neighbors(u)) for u in range(g.n)]
    triangles = 0
    for u, v in g.edges:
        triangles += len(nbrs[u] & nbrs[v])
    triangles //= 3
    return 3 * triangles / triples


@dataclass
class CentralityReport:
    diameter: int
    characteristic_path_length: float
    density: float
    link_per_node: float
    central_point_dominance: float
    clustering_coefficient: float
    betweenness: np.ndarray = field(repr=False)
    disconnected: bool = False

    def as_rows(self):
        return [
            ("diameter", self.diameter),
            ("characteristic_path_length", self.characteristic_path_length),
            ("density", self.density),
            ("link_per_node", self.link_per_node),
            ("central_point_dominance", self.central_point_dominance),
            ("clustering_coefficient", self.clustering_coefficient),
            ("disconnected", int(self.disconnected)),
        ]


def centrality_report(g: NetworkGraph) -> CentralityReport:
    if g.n == 0:
        raise EmptyGraphError("graph has no nodes")
    n = g.n
    dist = g.hop_distances()
    off = ~np.eye(n, dtype=bool)
    reach = np.isfinite(dist) & off
    disconnected = bool(n > 1 and not reach[off].all())
    path_len = float(dist[reach].mean()) if reach.any() else 0.0
    b = betweenness(g, dist)
    cpd = float(np.sum(b.max() - b) / (n - 1)) if n > 1 else 0.0
    return CentralityReport(
        diameter=_diameter(dist),
        characteristic_path_length=path_len,
        density=2 * g.m / (n * (n - 1)) if n > 1 else 0.0,
        link_per_node=g.m / n,
        central_point_dominance=cpd,
        clustering_coefficient=clustering_coefficient(g),
        betweenness=b,
        disconnected=disconnected,
    )


def relative_efficiency_loss(e_before: float, e_after: float) -> float:
    """``1 - E'/E``: the fraction of efficiency lost after a removal."""
    if e_before == 0:
        return 0.0
    return 1.0 - e_after / e_before


def efficiency_ratio(e_before: float, e_after: float) -> float:
    """``E/E'``: the literal ratio form of the relative drop (>= 1 for a drop)."""
    return np.inf if e_after == 0 else e_before / e_after


def laplacian_eigenvalues(g: NetworkGraph) -> np.ndarray:
    a = g.adjacency()
    lap = np.diag(a.sum(axis=1)) - a
    return np.linalg.eigvalsh(lap)


def algebraic_connectivity(g: NetworkGraph) -> float:
    if g.n < 2:
        return 0.0
    lam = laplacian_eigenvalues(g)[1]
    return float(max(lam, 0.0)) if lam > 1e-10 else 0.0


@dataclass
class VulnerabilityReport:
    efficiency: float
    v_max: float
    v_mean: float
    algebraic_connectivity: float
    v_max_ratio: float
    v_mean_ratio: float


def vulnerability_report(g: NetworkGraph) -> VulnerabilityReport:
    """Efficiency, worst and mean single-node efficiency drop, and lambda_2.

    ``v_max``/``v_mean`` use the relative loss ``1 - E(G-v)/E(G)``;
    ``*_ratio`` use ``E(G)/E(G-v)``.
    """
    if g.n < 2:
        raise EmptyGraphError("vulnerability needs at least two nodes")
    e = efficiency(g)
    losses, ratios = [], []
    for v in range(g.n):
        e_v = efficiency(g.without_node(v))
        losses.append(relative_efficiency_loss(e, e_v))
        ratios.append(efficiency_ratio(e, e_v))
    return VulnerabilityReport(
        efficiency=e,
        v_max=float(np.max(losses)),
        v_mean=float(np.mean(losses)),
        algebraic_connectivity=algebraic_connectivity(g),
        v_max_ratio=float(np.max(ratios)),
        v_mean_ratio=float(np.mean(ratios)),
    )


def loss_of_efficiency(g: NetworkGraph, removed_edges=()) -> float:
    removed_edges = list(removed_edges)
    if not removed_edges:
        return 0.0
    return relative_efficiency_loss(efficiency(g), efficiency(g.without_edges(removed_edges)))


def distance_distribution_pair(g: NetworkGraph, h: NetworkGraph):
    """Graph distance distributions of ``g`` and ``h`` on one shared support.

    The support runs over 1..max(D(g), D(h)); mass for unreachable pairs is
    moved to an extra bin at hop distance ``n`` (one more than any real hop
    count), so both histograms are normalized even after a disconnection.
    """
    dg, dh = g.hop_distances(), h.hop_distances()
    top = max(_diameter(dg), _diameter(dh), 1)
    pg = graph_distance_distribution(g, dg, support_max=top)
    ph = graph_distance_distribution(h, dh, support_max=top)
    missing_g = max(0.0, 1.0 - pg.mass)
    missing_h = max(0.0, 1.0 - ph.mass)
    if missing_g > 1e-12 or missing_h > 1e-12:
        far = float(max(g.n, top + 1))
        support = np.append(pg.support[:, 0], far)
        pg = Histogram(support, np.append(pg.weights, missing_g))
        ph = Histogram(support, np.append(ph.weights, missing_h))
    return pg.normalized(), ph.normalized()


def network_dissimilarity(g: NetworkGraph, removed_edges, metric="wst") -> float:
    pg, ph = distance_distribution_pair(g, g.without_edges(removed_edges))
    if metric == "wst":
        return wasserstein_1d(pg, ph)
    if metric == "js":
        return js_metric(pg, ph)
    raise ValueError(f"unknown metric {metric!r}")


def edge_criticality_map(g: NetworkGraph, metric="wst") -> dict:
    """Distance between G and G minus each single edge, keyed by ``(u, v)``."""
    return {e: network_dissimilarity(g, [e], metric) for e in g.edges}


def normalized_similarity(g: NetworkGraph, weighted=True) -> np.ndarray:
    """``D^-1/2 (I + A) D^-1/2`` with D the row sums of ``I + A``."""
    s = np.eye(g.n) + g.adjacency(weighted=weighted)
    deg = s.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    return inv_sqrt[:, None] * s * inv_sqrt[None, :]


def spectral_clustering(g: NetworkGraph, k: int, seed: int = 0, weighted=True) -> list:
    """Cluster nodes from the top-k eigenvectors of the normalized similarity.

    Labels are renumbered by first appearance so equal partitions compare
    equal regardless of k-means label order.
    """
    if k < 1 or k > g.n:
        raise KTooLargeError(f"k={k} with {g.n} nodes")
    if k == 1:
        return [0] * g.n
    vals, vecs = np.linalg.eigh(normalized_similarity(g, weighted))
    emb = vecs[:, np.argsort(vals)[::-1][:k]]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    emb = emb / np.where(norms > 0, norms, 1.0)
    raw = KMeans(n_clusters=k, n_init=10, random_state=seed).fit_predict(emb)
    remap = {}
    return [remap.setdefault(int(c), len(remap)) for c in raw]


def connected_components(g: NetworkGraph) -> list:
    labels = [-1] * g.n
    comp = 0
    for s in range(g.n):
        if labels[s] >= 0:
            continue
        stack = [s]
        labels[s] = comp
        while stack:
            u = stack.pop()
            for v in g.neighbors(u):
                if labels[v] < 0:
                    labels[v] = comp
                    stack.append(v)
        comp += 1
    return labels
