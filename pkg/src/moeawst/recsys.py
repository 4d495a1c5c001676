"""Top-L recommendation as a three-objective problem.

Lists are scored by accuracy, coverage and novelty.  Each list also maps
to a 3-D histogram of per-user scores, which MOEA/WST compares with the
earth mover's distance.  Only items a user has rated can be recommended
to that user, because accuracy reads the actual ratings.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    LengthMismatchError,
    ParseError,
    RatingOutOfRangeError,
    UnratedRecommendationError,
    UserTooSparseError,
)
from .graph import NetworkGraph, spectral_clustering
from .moea.engine import Evaluation, Problem
from .moea.operators import inversion_mutation, sbx_crossover
from .ot import Histogram, wasserstein_1d

SIMILARITY_BIN = 0.025
ACCURACY_BINS = 16
COVERAGE_BINS = 10
NOVELTY_BINS = 10


class RatingMatrix:
    """Dense users x items ratings in 1..5, with 0 meaning "not rated"."""

    def __init__(self, values):
        values = np.asarray(values, dtype=np.int64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"rating matrix must be 2-D and non-empty, got {values.shape}")
        rated = values[values != 0]
        if np.any((rated < 1) | (rated > 5)):
            raise RatingOutOfRangeError("ratings must lie in 1..5")
        self.values = values

    @property
    def M(self):
        return self.values.shape[0]

    @property
    def N(self):
        return self.values.shape[1]

    @property
    def degrees(self) -> np.ndarray:
        return (self.values > 0).sum(axis=0)

    def rated_items(self, u) -> np.ndarray:
        return np.flatnonzero(self.values[u] > 0)

    def rating(self, u, item) -> int:
        return int(self.values[u, item])


def load_ratings(path) -> RatingMatrix:
    """MovieLens ``u.data``: tab-separated ``user item rating timestamp``, 1-based ids.

    Internal ids are the external ids minus one.  A repeated (user, item)
    pair keeps its last rating and emits a warning.
    """
    entries = {}
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) < 3:
                raise ParseError(f"expected at least 3 fields, got {len(parts)}", line=lineno)
            try:
                user, item, rating = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ParseError(f"non-numeric field in {line.strip()!r}", line=lineno) from None
            if user < 1 or item < 1:
                raise ParseError("ids are 1-based", line=lineno)
            if rating != int(rating) or not 1 <= rating <= 5:
                raise RatingOutOfRangeError(f"line {lineno}: rating {parts[2]} outside 1..5")
            key = (user - 1, item - 1)
            if key in entries:
                warnings.warn(f"line {lineno}: duplicate rating for user {user}, item {item}; keeping the last")
            entries[key] = int(rating)
    if not entries:
        raise ParseError("no ratings found", line=1)
    n_users = max(u for u, _ in entries) + 1
    n_items = max(i for _, i in entries) + 1
    values = np.zeros((n_users, n_items), dtype=np.int64)
    for (u, i), r in entries.items():
        values[u, i] = r
    return RatingMatrix(values)


def _cosine(x, y):
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        warnings.warn("cosine similarity of an all-zero row is undefined; using 0", RuntimeWarning)
        return 0.0
    return float(np.clip(x @ y / (nx * ny), -1.0, 1.0))


def _pearson(x, y):
    return _cosine(x - x.mean(), y - y.mean())


def user_similarity(r: RatingMatrix, u, v, mode="cosine") -> float:
    """Cosine or Pearson similarity of two full rating rows (missing = 0)."""
    x = r.values[u].astype(float)
    y = r.values[v].astype(float)
    if mode == "cosine":
        return _cosine(x, y)
    if mode == "pearson":
        return _pearson(x, y)
    raise ValueError(f"unknown similarity {mode!r}")


def similarity_matrix(r: RatingMatrix, mode="cosine") -> np.ndarray:
    X = r.values.astype(float)
    if mode == "pearson":
        X = X - X.mean(axis=1, keepdims=True)
    elif mode != "cosine":
        raise ValueError(f"unknown similarity {mode!r}")
    norms = np.linalg.norm(X, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    S = (X @ X.T) / safe[:, None] / safe[None, :]
    S[norms == 0, :] = 0.0
    S[:, norms == 0] = 0.0
    return np.clip(S, -1.0, 1.0)


def build_similarity_graph(r: RatingMatrix, mode="cosine", tau=0.0) -> NetworkGraph:
    """Users linked when their similarity exceeds ``tau``; weight = similarity.

    ``tau`` must be nonnegative so that every edge weight is positive.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    S = similarity_matrix(r, mode)
    g = NetworkGraph(r.M)
    for u in range(r.M):
        for v in range(u + 1, r.M):
            if S[u, v] > tau:
                g.add_edge(u, v, float(S[u, v]))
    return g


def _similarity_grid(mode):
    lo = 0.0 if mode == "cosine" else -1.0
    n_bins = int(round((1.0 - lo) / SIMILARITY_BIN))
    return lo, n_bins


def build_user_signatures(r: RatingMatrix, mode="cosine") -> list:
    """Per-user histogram of similarities to every other user (bin width 0.025)."""
    if r.M < 2:
        raise ValueError("signatures need at least two users")
    S = similarity_matrix(r, mode)
    lo, n_bins = _similarity_grid(mode)
    centers = lo + (np.arange(n_bins) + 0.5) * SIMILARITY_BIN
    out = []
    for u in range(r.M):
        others = np.delete(S[u], u)
        idx = np.clip(np.floor((others - lo) / SIMILARITY_BIN).astype(int), 0, n_bins - 1)
        w = np.bincount(idx, minlength=n_bins) / len(others)
        out.append(Histogram(centers, w))
    return out


def build_wasserstein_graph(signatures, tau_w) -> NetworkGraph:
    """Users linked when their signatures are closer than ``tau_w``; weight = distance.

    Zero distances are stored as 1e-12 since edge weights must be positive.
    """
    n = len(signatures)
    g = NetworkGraph(n)
    for u in range(n):
        for v in range(u + 1, n):
            d = wasserstein_1d(signatures[u], signatures[v])
            if d < tau_w:
                g.add_edge(u, v, max(d, 1e-12))
    return g


@dataclass
class ObjectiveReport:
    accuracy: float
    coverage: float
    novelty: float
    per_user: np.ndarray = field(repr=False)
    accuracy_hist: Histogram = field(repr=False)
    coverage_hist: Histogram = field(repr=False)
    novelty_hist: Histogram = field(repr=False)
    info3d: Histogram = field(repr=False)


def self_information(r: RatingMatrix) -> np.ndarray:
    """``log2(M / d_j)`` per item; ``inf`` for items nobody rated."""
    d = r.degrees.astype(float)
    with np.errstate(divide="ignore"):
        return np.where(d > 0, np.log2(r.M / np.where(d > 0, d, 1.0)), np.inf)


def _novelty_top(r):
    return np.log2(r.M) if r.M > 1 else 1.0


def _bin(values, lo, hi, n_bins):
    width = (hi - lo) / n_bins
    return np.clip(np.floor((values - lo) / width).astype(int), 0, n_bins - 1)


def _centers(lo, hi, n_bins):
    width = (hi - lo) / n_bins
    return lo + (np.arange(n_bins) + 0.5) * width


def evaluate_recommendation(S, r: RatingMatrix, users=None) -> ObjectiveReport:
    """Accuracy, coverage and novelty of a recommendation matrix.

    Row ``i`` of ``S`` lists the items recommended to ``users[i]`` (default:
    user ``i``).  Per-user scores are the mean rating, the share of
    distinct items and the mean self-information of the list; they are
    binned into 1-D histograms (16 bins on [1, 5], 10 on [0, 1], 10 on
    [0, log2 M]) and jointly into a 3-D histogram whose support is
    rescaled to the unit cube.
    """
    S = np.asarray(S, dtype=np.int64)
    if S.ndim != 2:
        raise LengthMismatchError("recommendation matrix must be 2-D")
    n_rows, L = S.shape
    users = list(range(n_rows)) if users is None else list(users)
    if len(users) != n_rows:
        raise LengthMismatchError(f"{n_rows} rows for {len(users)} users")
    if np.any(S < 0) or np.any(S >= r.N):
        raise UnratedRecommendationError("item id out of range")
    ratings = r.values[np.asarray(users)[:, None], S]
    if np.any(ratings == 0):
        u, j = np.argwhere(ratings == 0)[0]
        raise UnratedRecommendationError(f"user {users[u]} has not rated item {S[u, j]}")
    info = self_information(r)

    acc_u = ratings.sum(axis=1) / L
    cov_u = np.array([len(np.unique(row)) for row in S]) / L
    nov_u = info[S].sum(axis=1) / L

    accuracy = float(ratings.sum() / (n_rows * L))
    coverage = len(np.unique(S)) / r.N
    novelty = float(nov_u.mean())

    top = _novelty_top(r)
    ia = _bin(acc_u, 1.0, 5.0, ACCURACY_BINS)
    ic = _bin(cov_u, 0.0, 1.0, COVERAGE_BINS)
    inov = _bin(nov_u, 0.0, top, NOVELTY_BINS)

    def hist1d(idx, lo, hi, n_bins):
        w = np.bincount(idx, minlength=n_bins) / n_rows
        return Histogram(_centers(lo, hi, n_bins), w)

    cells, counts = np.unique(np.stack([ia, ic, inov], axis=1), axis=0, return_counts=True)
    pts = np.stack(
        [
            _centers(1.0, 5.0, ACCURACY_BINS)[cells[:, 0]] / 5.0,
            _centers(0.0, 1.0, COVERAGE_BINS)[cells[:, 1]],
            _centers(0.0, top, NOVELTY_BINS)[cells[:, 2]] / top,
        ],
        axis=1,
    )
    return ObjectiveReport(
        accuracy=accuracy,
        coverage=float(coverage),
        novelty=novelty,
        per_user=np.stack([acc_u, cov_u, nov_u], axis=1),
        accuracy_hist=hist1d(ia, 1.0, 5.0, ACCURACY_BINS),
        coverage_hist=hist1d(ic, 0.0, 1.0, COVERAGE_BINS),
        novelty_hist=hist1d(inov, 0.0, top, NOVELTY_BINS),
        info3d=Histogram(pts, counts / n_rows),
    )


def repair_row(idx, n_candidates):
    """Replace repeated candidate indices by the nearest unused index (lower first)."""
    idx = [int(i) for i in idx]
    used = set()
    out = []
    for i in idx:
        if i not in used:
            used.add(i)
            out.append(i)
            continue
        for step in range(1, n_candidates):
            lo, hi = i - step, i + step
            if lo >= 0 and lo not in used:
                i = lo
                break
            if hi < n_candidates and hi not in used:
                i = hi
                break
        used.add(i)
        out.append(i)
    return out


class RecommendationProblem(Problem):
    """Pick L rated items per user; maximise accuracy, coverage and novelty."""

    n_obj = 3
    objective_names = ("accuracy", "coverage", "novelty")
    senses = (-1, -1, -1)
    reference_point = (0.0, 0.0, 0.0)

    def __init__(self, ratings: RatingMatrix, users, L, eta=3.0):
        self.ratings = ratings
        self.users = list(users)
        self.L = int(L)
        self.eta = eta
        if self.L < 1:
            raise ValueError("L must be at least 1")
        self.candidates = []
        for u in self.users:
            cand = ratings.rated_items(u)
            if len(cand) < self.L:
                raise UserTooSparseError(f"user {u} rated {len(cand)} items, fewer than L={self.L}")
            self.candidates.append(cand)
        n_rows = len(self.users)
        width = max(len(c) for c in self.candidates)
        self._high = np.array([len(c) - 1 for c in self.candidates])[:, None]
        self._items = np.zeros((n_rows, width), dtype=np.int64)
        self._position = np.full((n_rows, ratings.N), -1, dtype=np.int64)
        for u, c in enumerate(self.candidates):
            self._items[u, : len(c)] = c
            self._position[u, c] = np.arange(len(c))
        self._rows = np.arange(n_rows)[:, None]

    def evaluate(self, genotype) -> Evaluation:
        rep = evaluate_recommendation(genotype, self.ratings, self.users)
        return Evaluation(
            objectives=-np.array([rep.accuracy, rep.coverage, rep.novelty]),
            constraint_violation=0.0,
            signature=rep.info3d,
        )

    def sample(self, rng, n, exclude=frozenset()):
        out, keys = [], set(exclude)
        tries = 0
        while len(out) < n and tries < 100 * n:
            tries += 1
            g = np.array(
                [rng.choice(c, size=self.L, replace=False) for c in self.candidates],
                dtype=np.int64,
            )
            key = self.key(g)
            if key not in keys:
                keys.add(key)
                out.append(g)
        return out

    def crossover(self, a, b, rng):
        """SBX on candidate positions, then round, clip and de-duplicate per user."""
        high = np.broadcast_to(self._high, np.shape(a)).astype(float)
        c1, c2 = sbx_crossover(self.to_positions(a), self.to_positions(b), self.eta, (0.0, high), rng)
        return self.from_positions(c1), self.from_positions(c2)

    def mutate(self, genotype, prob, rng):
        if prob <= 0 or rng.random() >= prob:
            return np.array(genotype, copy=True)
        return inversion_mutation(genotype, rng)

    def to_positions(self, genotype):
        return self._position[self._rows, genotype].astype(float)

    def from_positions(self, pos):
        idx = np.clip(np.rint(pos).astype(np.int64), 0, self._high)
        if self.L > 1:
            srt = np.sort(idx, axis=1)
            for u in np.flatnonzero((srt[:, 1:] == srt[:, :-1]).any(axis=1)):
                idx[u] = repair_row(idx[u], len(self.candidates[u]))
        return self._items[self._rows, idx]

    def format_genotype(self, genotype) -> str:
        return ";".join(str(int(v)) for v in np.asarray(genotype).ravel())


def make_rs_problem(r: RatingMatrix, user_subset, L, eta=3.0) -> RecommendationProblem:
    return RecommendationProblem(r, user_subset, L, eta)


def cluster_users(source, k, seed=0, mode="cosine", tau=0.0) -> list:
    """Spectral clusters of users.

    ``source`` is a :class:`RatingMatrix` (clustered on its similarity
    graph) or an already built graph such as the Wasserstein graph, whose
    topology alone is used because its weights are distances.
    """
    if isinstance(source, RatingMatrix):
        return spectral_clustering(build_similarity_graph(source, mode, tau), k, seed)
    return spectral_clustering(source, k, seed, weighted=False)


def write_clusters(labels, path, user_ids=None):
    user_ids = range(len(labels)) if user_ids is None else user_ids
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "cluster"])
        for u, c in zip(user_ids, labels):
            w.writerow([u, c])
