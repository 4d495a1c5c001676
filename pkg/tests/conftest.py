import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from moeawst.graph import NetworkGraph, load_graph
from moeawst.recsys import RatingMatrix
from moeawst.wdn import simulate_detection_matrix

DATA = Path(__file__).parent / "data"

# five users, six items; missing ratings make item degrees differ so the
# three recommendation objectives genuinely conflict
RATINGS_5x6 = np.array(
    [
        [5, 4, 2, 0, 3, 3],
        [0, 1, 0, 3, 2, 0],
        [5, 0, 1, 0, 2, 2],
        [5, 5, 0, 5, 1, 3],
        [2, 1, 0, 1, 4, 0],
    ]
)


@pytest.fixture
def net1_graph():
    """Net1 topology: 9 junctions (0-8), reservoir 9, tank 10; weights are
    pipe lengths in feet read as seconds of travel at 1 ft/s."""
    return load_graph(DATA / "net1_proxy.csv")


@pytest.fixture
def net1_detection(net1_graph):
    return simulate_detection_matrix(net1_graph, list(range(9)), list(range(11)))


@pytest.fixture
def ratings_5x6():
    return RatingMatrix(RATINGS_5x6)


def random_connected_graph(n, m, seed, low=600.0, high=7200.0):
    """Random spanning tree plus chords, with uniform travel times."""
    rng = np.random.default_rng(seed)
    g = NetworkGraph(n)
    for v in range(1, n):
        g.add_edge(int(rng.integers(v)), v, float(rng.uniform(low, high)))
    while g.m < m:
        u, v = (int(x) for x in rng.choice(n, 2, replace=False))
        if not g.has_edge(u, v):
            g.add_edge(u, v, float(rng.uniform(low, high)))
    return g


@pytest.fixture(autouse=True)
def _quiet_small_front_warnings():
    from moeawst.moea.operators import FrontTooSmallWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FrontTooSmallWarning)
        yield


def enumerated_front(problem, genotypes):
    """Objective rows of the exact non-dominated set over ``genotypes``."""
    from moeawst.moea.pareto import non_dominated_mask

    F = np.unique(np.array([problem.evaluate(g).objectives for g in genotypes]), axis=0)
    return F[non_dominated_mask(F)]


def write_sp_config(directory, generations=5, replications=2, algorithms=("nsga2", "moea_wst")):
    """Small sensor-placement config on the Net1 fixture; returns its path."""
    import json
    import shutil

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    shutil.copy(DATA / "net1_proxy.csv", directory / "net1.csv")
    cfg = {
        "problem": "sensor_placement",
        "data": {"graph": "net1.csv", "events": list(range(9)), "locations": list(range(11)), "budget": 2},
        "algorithms": list(algorithms),
        "optimizer": {"generations": generations},
        "replications": replications,
        "seed": 7,
    }
    path = directory / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def tree_bytes(root):
    """Relative path -> file bytes for every file below ``root``."""
    root = Path(root)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


SUITE_LIMIT_S = 300.0
_session = {}


def pytest_sessionstart(session):
    _session["start"] = time.perf_counter()


def pytest_collection_modifyitems(session, config, items):
    _session["gate"] = any(item.module.__name__ == "test_acceptance" for item in items)


def pytest_sessionfinish(session, exitstatus):
    _session["elapsed"] = time.perf_counter() - _session["start"]
    if _session["elapsed"] >= SUITE_LIMIT_S and session.exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not _session.get("gate"):
        return
    elapsed = _session.get("elapsed", time.perf_counter() - _session["start"])
    ok = elapsed < SUITE_LIMIT_S
    terminalreporter.write_line(
        f"ACCEPTANCE criterion 10: {'PASS' if ok else 'FAIL'} | session took {elapsed:.1f} s "
        f"(limit {SUITE_LIMIT_S:.0f} s)"
    )
