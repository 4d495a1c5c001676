import numpy as np
import pytest
from conftest import enumerated_front

from moeawst.errors import ConfigError, UnevaluatedIndividualError
from moeawst.moea import (
    Individual,
    OptimizerConfig,
    non_dominated_mask,
    rank_population,
    run_moea_wst,
    run_moead,
    run_nsga2,
    run_random_search,
    survive,
)
from moeawst.moea.pareto import build_weight_vectors
from moeawst.wdn import SensorPlacementProblem, enumerate_placements

RUNNERS = [run_nsga2, run_moea_wst, run_moead, run_random_search]


def individual(f, cv=0.0):
    return Individual(np.zeros(1), np.asarray(f, dtype=float), cv)


def snapshot(res):
    return (
        [(h.generation, h.evaluations, h.hypervolume) for h in res.history],
        [ind.genotype.tobytes() for ind in res.pareto],
        res.front.tobytes(),
    )


@pytest.fixture
def sp2(net1_detection):
    return SensorPlacementProblem(net1_detection, 2)


class TestRanking:
    def test_infeasible_after_feasible(self):
        pop = [individual((5, 5)), individual((0, 0), cv=1.0), individual((1, 1), cv=3.0)]
        fronts, rank, _ = rank_population(pop)
        assert fronts == [[0], [1], [2]]
        assert rank.tolist() == [0, 1, 2]

    def test_unevaluated(self):
        with pytest.raises(UnevaluatedIndividualError):
            rank_population([Individual(np.zeros(1))])

    def test_survive_prefers_crowding_then_index(self):
        pop = [individual(f) for f in [(0, 4), (1, 3), (2, 2), (3, 1), (4, 0)]]
        kept = survive(pop, 3)
        # extremes are infinite; the three inner points tie, lowest index wins
        assert [p.objectives.tolist() for p in kept] == [[0, 4], [1, 3], [4, 0]]


class TestConfig:
    @pytest.mark.parametrize(
        "field,value",
        [("population_size", 1), ("generations", -1), ("mutation_probability", 1.5), ("sbx_eta", 0)],
    )
    def test_invalid(self, sp2, field, value):
        with pytest.raises(ConfigError):
            run_nsga2(sp2, OptimizerConfig(**{field: value}))


class TestRuns:
    @pytest.mark.parametrize("runner", RUNNERS)
    def test_deterministic(self, sp2, runner):
        cfg = OptimizerConfig(generations=10, seed=11)
        assert snapshot(runner(sp2, cfg)) == snapshot(runner(sp2, cfg))

    @pytest.mark.parametrize("runner", RUNNERS)
    def test_history_length_and_budget(self, sp2, runner):
        res = runner(sp2, OptimizerConfig(generations=7, seed=0))
        assert len(res.history) == 8
        assert [h.generation for h in res.history] == list(range(8))
        steps = np.diff([h.evaluations for h in res.history])
        if runner is run_random_search:
            # 67 placements exist for p = 2; sampling stops when they run out
            assert np.all(steps <= 10) and res.history[-1].evaluations == 67
        else:
            assert np.all(steps == 10)

    def test_generations_zero(self, sp2):
        res = run_nsga2(sp2, OptimizerConfig(generations=0, seed=2))
        F = np.array([ind.objectives for ind in res.population])
        expected = np.unique(F[non_dominated_mask(F)], axis=0)
        np.testing.assert_array_equal(np.unique(res.front, axis=0), expected)

    @pytest.mark.parametrize("runner", [run_nsga2, run_moea_wst, run_random_search])
    def test_hypervolume_never_drops(self, sp2, runner):
        for seed in range(3):
            hv = runner(sp2, OptimizerConfig(generations=20, seed=seed)).hypervolumes
            assert all(b >= a for a, b in zip(hv, hv[1:]))

    def test_timing_off_by_default(self, sp2):
        res = run_nsga2(sp2, OptimizerConfig(generations=2))
        assert all(h.elapsed_ms == 0.0 for h in res.history)

    def test_pareto_unique_and_feasible(self, sp2):
        res = run_moea_wst(sp2, OptimizerConfig(generations=20, seed=4))
        keys = [ind.genotype.tobytes() for ind in res.pareto]
        assert len(keys) == len(set(keys))
        assert all(ind.genotype.sum() <= 2 for ind in res.pareto)

    @pytest.mark.parametrize("runner", [run_nsga2, run_moea_wst])
    def test_budget_one_finds_enumerated_optimum(self, net1_detection, runner):
        prob = SensorPlacementProblem(net1_detection, 1)
        truth = {tuple(r) for r in enumerated_front(prob, enumerate_placements(11, 1))}
        res = runner(prob, OptimizerConfig(generations=50, seed=0))
        assert {tuple(r) for r in res.front} == truth


class TestMoead:
    def test_weight_vectors_cover_population(self, sp2):
        res = run_moead(sp2, OptimizerConfig(generations=5, seed=0))
        assert len(res.population) == len(build_weight_vectors(40, 2, 10))

    def test_custom_weights(self, sp2):
        ws = build_weight_vectors(5, 2, 2)
        res = run_moead(sp2, OptimizerConfig(generations=3, seed=0), weights=ws)
        assert len(res.population) == 5

    def test_front_feasible(self, sp2):
        res = run_moead(sp2, OptimizerConfig(generations=30, seed=1))
        assert all(ind.feasible for ind in res.pareto)
