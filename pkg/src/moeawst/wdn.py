"""Sensor placement for contamination detection on a network.

Detection times come either from a travel-time proxy (shortest weighted
path from the injection node to the sensor) or from a CSV produced by an
external hydraulic/quality simulator.  Undetected events carry ``inf``
internally and ``-1`` on disk.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import (
    BudgetTooLargeError,
    LengthMismatchError,
    NegativeTimeError,
    NodeOutOfRangeError,
    NonpositiveTravelTimeError,
    ParseError,
    ShapeMismatchError,
    TimeBeyondHorizonError,
)
from .moea.engine import Evaluation, Problem
from .moea.operators import bitflip_mutation, feasible_by_design_crossover, one_point_crossover
from .ot import Histogram

UNDETECTED = np.inf
T_MAX = 86400.0
N_BINS = 24
DETECTION_THRESHOLD = 0.10


@dataclass
class DetectionMatrix:
    """Detection time of each event (row) at each candidate location (column)."""

    events: list
    locations: list
    times: np.ndarray
    t_max: float = T_MAX
    probabilities: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.shape != (len(self.events), len(self.locations)):
            raise ShapeMismatchError(
                f"times {self.times.shape} vs {len(self.events)} events x {len(self.locations)} locations"
            )
        if not self.events or not self.locations:
            raise ShapeMismatchError("need at least one event and one location")
        finite = self.times[np.isfinite(self.times)]
        if np.any(finite < 0):
            raise NegativeTimeError("detection times must be nonnegative")
        if np.any(finite > self.t_max):
            raise TimeBeyondHorizonError(f"detection time beyond horizon {self.t_max}")
        if self.probabilities is None:
            self.probabilities = np.full(len(self.events), 1.0 / len(self.events))
        else:
            self.probabilities = np.asarray(self.probabilities, dtype=float)
            if len(self.probabilities) != len(self.events):
                raise ShapeMismatchError("one probability per event")

    @property
    def n_events(self):
        return len(self.events)

    @property
    def n_locations(self):
        return len(self.locations)

    def time(self, event, location):
        return float(self.times[self.events.index(event), self.locations.index(location)])


def simulate_detection_matrix(g, events, locations, travel_time=None, t_max=T_MAX) -> DetectionMatrix:
    """Proxy detection times: shortest travel time from each event node to each sensor node.

    ``travel_time`` is a per-edge constant in seconds; when ``None`` the
    graph's edge weights are used as travel times.  Times beyond ``t_max``
    and unreachable sensors count as undetected.
    """
    for node in list(events) + list(locations):
        if not 0 <= node < g.n:
            raise NodeOutOfRangeError(f"node {node} outside [0, {g.n})")
    rows, cols, vals = [], [], []
    for u, v in g.edges:
        w = float(travel_time) if travel_time is not None else g.weight(u, v, default=np.nan)
        if not w > 0:
            raise NonpositiveTravelTimeError(f"edge ({u}, {v}) has travel time {w}")
        rows.append(u)
        cols.append(v)
        vals.append(w)
    mat = csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    dist = dijkstra(mat, directed=False, indices=list(events))
    times = dist[:, list(locations)]
    times = np.where(times > t_max, UNDETECTED, times)
    return DetectionMatrix(list(events), list(locations), times, t_max)


def ingest_detection_matrix(path, t_max=T_MAX) -> DetectionMatrix:
    """Read ``event,<loc1>,<loc2>,...`` CSV; cells are seconds or ``-1`` for undetected."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty detection matrix", line=1) from None
        if not header or header[0].strip() != "event":
            raise ParseError("header must start with 'event'", line=1)
        try:
            locations = [int(c) for c in header[1:]]
        except ValueError:
            raise ParseError("location ids must be integers", line=1) from None
        if not locations:
            raise ParseError("no location columns", line=1)
        events, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
            try:
                events.append(int(row[0]))
            except ValueError:
                raise ParseError(f"bad event id {row[0]!r}", line=lineno, column=1) from None
            vals = []
            for col, cell in enumerate(row[1:], start=2):
                try:
                    t = float(cell)
                except ValueError:
                    raise ParseError(f"not a number: {cell!r}", line=lineno, column=col) from None
                if t == -1:
                    t = UNDETECTED
                elif t < 0:
                    raise NegativeTimeError(f"line {lineno}, column {col}: negative time {t}")
                elif t > t_max:
                    raise TimeBeyondHorizonError(f"line {lineno}, column {col}: {t} > {t_max}")
                vals.append(t)
            rows.append(vals)
    if not events:
        raise ParseError("no event rows", line=2)
    return DetectionMatrix(events, locations, np.array(rows), t_max)


def write_detection_matrix(d: DetectionMatrix, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["event"] + [str(x) for x in d.locations])
        for ev, row in zip(d.events, d.times):
            w.writerow([ev] + ["-1" if not np.isfinite(t) else repr(float(t)) for t in row])


@dataclass
class SpEvaluation:
    f1: float
    f2: float
    t_hat: np.ndarray = field(repr=False)
    undetected: int = 0


def _check_placement(s, d):
    s = np.asarray(s)
    if s.shape != (d.n_locations,):
        raise LengthMismatchError(f"placement has length {s.size}, expected {d.n_locations}")
    return s


def _raw_detection(s, d):
    placed = np.flatnonzero(s)
    if placed.size == 0:
        return np.full(d.n_events, UNDETECTED)
    return d.times[:, placed].min(axis=1)


def evaluate_placement(s, d: DetectionMatrix) -> SpEvaluation:
    """Mean (f1) and standard deviation (f2) of the per-event minimum detection time.

    Events no placed sensor detects are charged ``t_max``.  Both moments are
    weighted by the event probabilities, i.e. divided by |A| when uniform.
    """
    s = _check_placement(s, d)
    raw = _raw_detection(s, d)
    undetected = int(np.sum(~np.isfinite(raw)))
    t_hat = np.where(np.isfinite(raw), raw, d.t_max)
    alpha = d.probabilities
    f1 = float(alpha @ t_hat)
    f2 = float(np.sqrt(max(alpha @ (t_hat - f1) ** 2, 0.0)))
    return SpEvaluation(f1=f1, f2=f2, t_hat=t_hat, undetected=undetected)


def bin_centers(t_max=T_MAX, n_bins=N_BINS) -> np.ndarray:
    """Centres of the hourly bins over (0, t_max] plus the undetected bin just beyond."""
    width = t_max / n_bins
    return (np.arange(n_bins + 1) + 0.5) * width


def placement_histogram(s, d: DetectionMatrix, n_bins=N_BINS) -> Histogram:
    """Share of events detected in each time bin, plus an undetected bin.

    An event detected at time t lands in bin ceil(t / width) (t = 0 in bin
    one); undetected events land in the extra bin.
    """
    s = _check_placement(s, d)
    raw = _raw_detection(s, d)
    width = d.t_max / n_bins
    idx = np.full(d.n_events, n_bins)
    det = np.isfinite(raw)
    idx[det] = np.clip(np.ceil(raw[det] / width).astype(int), 1, n_bins) - 1
    weights = np.bincount(idx, weights=d.probabilities, minlength=n_bins + 1)
    return Histogram(bin_centers(d.t_max, n_bins), weights / weights.sum())


def sensor_matrices_from_detection(d: DetectionMatrix, n_bins=N_BINS):
    """Step-shaped concentration matrices ((K+1) x |A|) consistent with ``d``.

    Concentration at step t is 1 once ``t * dt`` reaches the detection time
    and 0 before; events a location never sees stay at 0.
    """
    dt = d.t_max / n_bins
    steps = np.arange(n_bins + 1)[:, None] * dt
    return [(steps >= d.times[:, j][None, :]).astype(float) for j in range(d.n_locations)]


def placement_matrix(s, sensor_matrices) -> np.ndarray:
    """Element-wise maximum of the sensor matrices selected by ``s``."""
    s = np.asarray(s)
    if len(s) != len(sensor_matrices):
        raise ShapeMismatchError(f"{len(s)} switches for {len(sensor_matrices)} matrices")
    shapes = {np.shape(m) for m in sensor_matrices}
    if len(shapes) > 1:
        raise ShapeMismatchError(f"sensor matrices have shapes {sorted(shapes)}")
    placed = np.flatnonzero(s)
    if placed.size == 0:
        return np.zeros(np.shape(sensor_matrices[0]))
    return np.max(np.stack([sensor_matrices[i] for i in placed]), axis=0)


def detection_times_from_matrix(h, tau=DETECTION_THRESHOLD, dt=T_MAX / N_BINS) -> np.ndarray:
    """First step at which each event's concentration reaches ``tau``, in seconds."""
    h = np.asarray(h)
    hit = h >= tau
    first = np.argmax(hit, axis=0).astype(float)
    return np.where(hit.any(axis=0), first * dt, UNDETECTED)


class SensorPlacementProblem(Problem):
    """Binary placement vectors minimising mean and spread of detection time."""

    n_obj = 2
    objective_names = ("f1", "f2")
    senses = (1, 1)

    def __init__(self, detection: DetectionMatrix, budget: int):
        if budget < 1:
            raise ValueError("budget must be at least 1")
        if budget > detection.n_locations:
            raise BudgetTooLargeError(f"budget {budget} > {detection.n_locations} locations")
        self.detection = detection
        self.budget = int(budget)
        self.reference_point = (detection.t_max, detection.t_max / 2)

    @property
    def n_locations(self):
        return self.detection.n_locations

    def evaluate(self, genotype) -> Evaluation:
        ev = evaluate_placement(genotype, self.detection)
        cv = max(0, int(np.sum(genotype)) - self.budget)
        return Evaluation(
            objectives=np.array([ev.f1, ev.f2]),
            constraint_violation=float(cv),
            signature=placement_histogram(genotype, self.detection),
        )

    def _vector(self, idx):
        x = np.zeros(self.n_locations, dtype=np.int8)
        x[list(idx)] = 1
        return x

    def sample(self, rng, n, exclude=frozenset()):
        """Distinct placements with exactly ``budget`` sensors.

        If fewer than ``n`` such placements are left, smaller placements
        are added (largest first) until the feasible space runs out.
        """
        out, keys = [], set(exclude)
        n_loc = self.n_locations
        for size in range(self.budget, -1, -1):
            if len(out) >= n:
                break
            total = comb(n_loc, size)
            if total <= 20000:
                combos = list(itertools.combinations(range(n_loc), size))
                for k in rng.permutation(len(combos)):
                    x = self._vector(combos[k])
                    key = self.key(x)
                    if key not in keys:
                        keys.add(key)
                        out.append(x)
                        if len(out) >= n:
                            break
            else:
                tries = 0
                while len(out) < n and tries < 100 * n:
                    tries += 1
                    x = self._vector(np.sort(rng.choice(n_loc, size=size, replace=False)))
                    key = self.key(x)
                    if key not in keys:
                        keys.add(key)
                        out.append(x)
        return out

    def crossover(self, a, b, rng):
        return one_point_crossover(a, b, rng)

    def specific_crossover(self, a, b, rng):
        # the budget-preserving operator needs feasible parents
        if a.sum() > self.budget or b.sum() > self.budget:
            return None
        return feasible_by_design_crossover(a, b, self.budget, rng)

    def mutate(self, genotype, prob, rng):
        return bitflip_mutation(genotype, prob, rng)

    def format_genotype(self, genotype) -> str:
        return "".join(str(int(v)) for v in genotype)


def make_sp_problem(d: DetectionMatrix, p: int) -> SensorPlacementProblem:
    return SensorPlacementProblem(d, p)


def enumerate_placements(n_locations, budget):
    """Every placement with between 0 and ``budget`` sensors."""
    for size in range(budget + 1):
        for combo in itertools.combinations(range(n_locations), size):
            x = np.zeros(n_locations, dtype=np.int8)
            x[list(combo)] = 1
            yield x
