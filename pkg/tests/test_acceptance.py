"""Acceptance gate: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` (the lines are printed even
without ``-s``).  Criterion 10, the whole-suite time limit, is reported by
``conftest.py`` at the end of the session.
"""

import itertools
import time

import numpy as np
import pytest
from conftest import (
    RATINGS_5x6,
    enumerated_front,
    random_connected_graph,
    tree_bytes,
    write_sp_config,
)

from moeawst.cli import main
from moeawst.graph import relative_efficiency_loss
from moeawst.moea import (
    OptimizerConfig,
    coverage_metric,
    hypervolume,
    non_dominated_sort,
    run_moea_wst,
    run_nsga2,
    run_random_search,
)
from moeawst.moea.operators import feasible_by_design_crossover
from moeawst.ot import Histogram, emd_lp, wasserstein_1d
from moeawst.recsys import RatingMatrix, RecommendationProblem, evaluate_recommendation
from moeawst.wdn import enumerate_placements, make_sp_problem, simulate_detection_matrix


@pytest.fixture
def verdict(capsys):
    def report(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}")
        assert ok, detail

    return report


def random_1d(rng):
    m = int(rng.integers(1, 11))
    w = rng.random(m)
    return Histogram(rng.random(m) * 10.0, w / w.sum())


def test_criterion_1_one_dimensional_oracle(verdict):
    rng = np.random.default_rng(1)
    pairs = [(random_1d(rng), random_1d(rng)) for _ in range(1000)]
    t0 = time.perf_counter()
    worst = max(abs(wasserstein_1d(a, b) - emd_lp(a, b).cost) for a, b in pairs)
    elapsed = time.perf_counter() - t0
    verdict(1, worst <= 1e-9 and elapsed < 10.0, f"max |1-D - LP| = {worst:.2e}, {elapsed:.2f} s")


def test_criterion_2_metric_axioms(verdict):
    rng = np.random.default_rng(2)
    sym, tri = 0.0, -np.inf
    for _ in range(500):
        a, b, c = (random_1d(rng) for _ in range(3))
        ab, ba = emd_lp(a, b).cost, emd_lp(b, a).cost
        bc, ac = emd_lp(b, c).cost, emd_lp(a, c).cost
        sym = max(sym, abs(ab - ba))
        tri = max(tri, ac - ab - bc)
    shifts = [emd_lp(Histogram([0.0], [1.0]), Histogram([t], [1.0])).cost for t in (0.0, 1.0, 100.0)]
    ok = sym <= 1e-9 and tri <= 1e-7 and shifts == [0.0, 1.0, 100.0]
    verdict(2, ok, f"symmetry gap {sym:.1e}, triangle excess {tri:.1e}, point-mass shifts {shifts}")


# efficiency before and after edge removal, with the expected rounded loss
EFFICIENCY_PINS = [
    ("Neptun e1", 0.068608, 0.065390, 0.0469),
    ("Neptun e2", 0.068608, 0.064486, 0.0601),
    ("Neptun e1+e2", 0.068608, 0.051924, 0.2432),
    ("Abbiategrasso e1", 0.047557, 0.045019, 0.0534),
    ("Abbiategrasso e2", 0.047557, 0.046385, 0.0246),
    ("Abbiategrasso e3", 0.047557, 0.040405, 0.1504),
    ("Abbiategrasso e1+e2+e3", 0.047557, 0.031077, 0.3465),
]


def test_criterion_3_loss_of_efficiency(verdict):
    gaps = {name: abs(relative_efficiency_loss(e, e2) - want) for name, e, e2, want in EFFICIENCY_PINS}
    worst = max(gaps, key=gaps.get)
    verdict(3, gaps[worst] <= 5e-3, f"7 pins, largest gap {gaps[worst]:.1e} ({worst})")


def brute_fronts(F):
    left = list(range(len(F)))
    out = []
    while left:
        front = [i for i in left if not any(np.all(F[j] <= F[i]) and np.any(F[j] < F[i]) for j in left)]
        out.append(front)
        left = [i for i in left if i not in front]
    return out


def brute_coverage(A, B):
    return np.mean([any(np.all(a <= b) for a in A) for b in B])


def test_criterion_4_pareto_oracles(verdict):
    rng = np.random.default_rng(4)
    sort_ok = cov_ok = 0
    for k in range(100):
        n, m = int(rng.integers(1, 201)), 2 + k % 2
        F = rng.integers(0, 8, size=(n, m)).astype(float)
        sort_ok += non_dominated_sort(F) == brute_fronts(F)
        A = rng.integers(0, 8, size=(int(rng.integers(1, 30)), m)).astype(float)
        cov_ok += coverage_metric(A, F) == brute_coverage(A, F)
    worst = 0.0
    for _ in range(20):
        F = rng.random((20, 3))
        exact = hypervolume(F, (1, 1, 1))
        pts = rng.random((10**6, 3))
        hit = np.zeros(len(pts), dtype=bool)
        for f in F:
            hit |= np.all(pts >= f, axis=1)
        worst = max(worst, abs(hit.mean() - exact) / exact)
    ok = sort_ok == 100 and cov_ok == 100 and worst <= 0.01
    verdict(4, ok, f"sorting {sort_ok}/100, coverage {cov_ok}/100, worst HV vs Monte-Carlo {worst:.2%}")


def test_criterion_5_sensor_placement_end_to_end(verdict, net1_detection):
    t0 = time.perf_counter()
    tallies = {}
    for p in (1, 2):
        prob = make_sp_problem(net1_detection, p)
        truth = enumerated_front(prob, enumerate_placements(11, p))
        for runner in (run_nsga2, run_moea_wst):
            hits = 0
            for seed in range(20):
                found = runner(prob, OptimizerConfig(generations=50, seed=seed)).front
                hits += coverage_metric(truth, found, weak=False) == 0.0 and coverage_metric(found, truth) == 1.0
            tallies[f"{runner.__name__[4:]} p={p}"] = hits
    elapsed = time.perf_counter() - t0
    ok = all(h >= 19 for h in tallies.values()) and elapsed < 60.0
    detail = ", ".join(f"{k}: {v}/20" for k, v in tallies.items())
    verdict(5, ok, f"{detail}; {elapsed:.1f} s")


def test_criterion_6_sample_efficiency(verdict):
    g = random_connected_graph(34, 45, seed=2021)
    prob = make_sp_problem(simulate_detection_matrix(g, range(34), range(34)), 5)
    finals = {"moea_wst": [], "random": []}
    monotone = 0
    for seed in range(20):
        cfg = OptimizerConfig(generations=30, seed=seed)
        wst = run_moea_wst(prob, cfg).hypervolumes
        finals["moea_wst"].append(wst[-1])
        finals["random"].append(run_random_search(prob, cfg).hypervolumes[-1])
        monotone += all(b >= a for a, b in zip(wst, wst[1:]))
    med_w, med_r = np.median(finals["moea_wst"]), np.median(finals["random"])
    ok = med_w >= med_r and monotone == 20
    verdict(6, ok, f"median HV MOEA/WST {med_w:.4e} vs random {med_r:.4e}; monotone {monotone}/20")


def test_criterion_7_feasible_by_design(verdict):
    rng = np.random.default_rng(7)
    bad = 0
    for _ in range(10**5):
        n = int(rng.integers(2, 35))
        p = int(rng.integers(1, n + 1))
        x = np.zeros(n, dtype=np.int8)
        y = np.zeros(n, dtype=np.int8)
        x[rng.choice(n, int(rng.integers(0, p + 1)), replace=False)] = 1
        y[rng.choice(n, int(rng.integers(0, p + 1)), replace=False)] = 1
        c1, c2 = feasible_by_design_crossover(x, y, p, rng)
        bad += c1.sum() > p or c2.sum() > p
    verdict(7, bad == 0, f"{bad} budget violations in 100000 crossovers")


def test_criterion_8_recommender_objectives(verdict, ratings_5x6):
    from math import log2

    rep = evaluate_recommendation([[0, 1], [3, 4], [0, 2], [1, 3], [0, 4]], ratings_5x6)
    a, b, c = log2(5 / 4), log2(5 / 2), log2(5 / 3)
    hand_nov = (a + c / 2 + (a + b) / 2 + (a + c) / 2 + a / 2) / 5
    hand = rep.accuracy == 3.6 and rep.coverage == 5 / 6 and abs(rep.novelty - hand_nov) <= 1e-15

    prob2 = RecommendationProblem(ratings_5x6, range(5), 2)
    masses = []
    for g in prob2.sample(np.random.default_rng(8), 100):
        r = evaluate_recommendation(g, ratings_5x6)
        masses += [h.mass for h in (r.accuracy_hist, r.coverage_hist, r.novelty_hist, r.info3d)]
    mass_gap = max(abs(np.array(masses) - 1.0))

    prob = RecommendationProblem(RatingMatrix(RATINGS_5x6), range(5), 1)
    lists = itertools.product(*[c.tolist() for c in prob.candidates])
    truth = enumerated_front(prob, (np.array(s)[:, None] for s in lists))
    subset = 0
    for runner in (run_nsga2, run_moea_wst):
        for seed in range(5):
            found = runner(prob, OptimizerConfig(generations=50, seed=seed)).front
            subset += coverage_metric(truth, found, weak=False) == 0.0
    ok = hand and mass_gap <= 1e-9 and subset == 10
    verdict(8, ok, f"hand values {'match' if hand else 'differ'}, mass gap {mass_gap:.1e}, "
                   f"L=1 fronts inside true front {subset}/10 ({len(truth)} true points)")


def test_criterion_9_cli_determinism(verdict, tmp_path):
    cfg = write_sp_config(tmp_path, generations=10, replications=2, algorithms=("nsga2", "moea_wst", "moead", "random"))
    codes = [main(["optimize", "--config", str(cfg), "--out", str(tmp_path / run)]) for run in ("a", "b")]
    a, b = tree_bytes(tmp_path / "a"), tree_bytes(tmp_path / "b")
    verdict(9, codes == [0, 0] and a == b and len(a) > 0, f"{len(a)} files compared byte for byte")
