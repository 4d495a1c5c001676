import itertools

import numpy as np
import pytest

from moeawst.errors import (
    DimensionMismatchError,
    EmptyFrontError,
    NTooSmallError,
    UnsupportedDimensionError,
)
from moeawst.moea.pareto import (
    build_weight_vectors,
    chebyshev_scalarize,
    coverage_metric,
    crowding_distance,
    dominates,
    hypervolume,
    non_dominated_mask,
    non_dominated_sort,
    simplex_lattice,
    weakly_dominates,
    weighted_sum_scalarize,
)


def brute_force_fronts(F):
    """Peel fronts by repeated pairwise scans."""
    left = list(range(len(F)))
    fronts = []
    while left:
        front = [
            i
            for i in left
            if not any(all(F[j] <= F[i]) and any(F[j] < F[i]) for j in left if j != i)
        ]
        fronts.append(front)
        left = [i for i in left if i not in front]
    return fronts


def brute_force_coverage(A, B, weak=True):
    hits = 0
    for b in B:
        for a in A:
            if all(a <= b) and (weak or any(a < b)):
                hits += 1
                break
    return hits / len(B)


class TestDominance:
    def test_examples(self):
        assert dominates((1, 2), (2, 3))
        assert not dominates((1, 2), (1, 2))
        assert not dominates((1, 3), (2, 1))
        assert not dominates((2, 1), (1, 3))

    def test_weak(self):
        assert weakly_dominates((1, 2), (1, 2))
        assert not weakly_dominates((1, 3), (2, 1))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            dominates((1, 2), (1, 2, 3))


class TestSorting:
    def test_example(self):
        assert non_dominated_sort([(1, 2), (2, 1), (3, 3)]) == [[0, 1], [2]]

    def test_single(self):
        assert non_dominated_sort([(5, 5)]) == [[0]]

    def test_empty(self):
        assert non_dominated_sort(np.zeros((0, 2))) == []

    def test_against_brute_force(self):
        rng = np.random.default_rng(0)
        for trial in range(100):
            n, m = int(rng.integers(1, 60)), int(rng.integers(2, 4))
            # integer grid so ties and duplicates occur
            F = rng.integers(0, 6, size=(n, m)).astype(float)
            assert non_dominated_sort(F) == brute_force_fronts(F)
            mask = non_dominated_mask(F)
            assert sorted(np.flatnonzero(mask).tolist()) == brute_force_fronts(F)[0]

    def test_200_points(self):
        F = np.random.default_rng(1).random((200, 2))
        assert non_dominated_sort(F) == brute_force_fronts(F)


class TestCrowding:
    def test_example(self):
        cd = crowding_distance([(1, 3), (2, 2), (3, 1)])
        assert cd[0] == np.inf and cd[2] == np.inf
        assert cd[1] == pytest.approx(4 / 3)

    def test_two_points(self):
        assert np.all(np.isinf(crowding_distance([(1, 2), (2, 1)])))

    def test_zero_objective_skipped(self):
        cd = crowding_distance([(1, 0), (2, 0), (3, 0)])
        assert cd[1] == pytest.approx(2 / 3)


def mc_hypervolume(F, ref, samples, rng):
    low = F.min(axis=0)
    box = np.prod(ref - low)
    pts = low + rng.random((samples, len(ref))) * (ref - low)
    hit = np.zeros(samples, dtype=bool)
    for f in F:
        hit |= np.all(pts >= f, axis=1)
    return box * hit.mean()


class TestHypervolume:
    def test_unit(self):
        assert hypervolume([(1, 1)], (2, 2)) == 1.0

    def test_empty(self):
        assert hypervolume(np.zeros((0, 2)), (1, 1)) == 0.0

    def test_point_on_reference_dropped(self):
        assert hypervolume([(2, 0)], (2, 2)) == 0.0

    def test_2d_staircase(self):
        assert hypervolume([(1, 3), (2, 2), (3, 1)], (4, 4)) == pytest.approx(6.0)

    def test_3d_dominated_points_ignored(self):
        F = np.array([(0.2, 0.2, 0.2), (0.5, 0.5, 0.5)])
        assert hypervolume(F, (1, 1, 1)) == pytest.approx(0.8**3)

    def test_3d_inclusion_exclusion(self):
        # two boxes: volume by inclusion-exclusion
        F = np.array([(0.0, 0.5, 0.5), (0.5, 0.0, 0.0)])
        a = 1 * 0.5 * 0.5
        b = 0.5 * 1 * 1
        both = 0.5 * 0.5 * 0.5
        assert hypervolume(F, (1, 1, 1)) == pytest.approx(a + b - both)

    def test_monte_carlo_3d(self):
        rng = np.random.default_rng(2)
        F = rng.random((20, 3))
        exact = hypervolume(F, (1, 1, 1))
        assert mc_hypervolume(F, np.ones(3), 10**6, rng) == pytest.approx(exact, rel=0.01)

    def test_unsupported_dimension(self):
        with pytest.raises(UnsupportedDimensionError):
            hypervolume([(0, 0, 0, 0)], (1, 1, 1, 1))


class TestCoverage:
    def test_full(self):
        assert coverage_metric([(0, 0)], [(1, 1), (2, 1)]) == 1.0

    def test_incomparable(self):
        assert coverage_metric([(1, 3)], [(3, 1), (2, 2)]) == 0.0

    def test_equal_points_weak_vs_strict(self):
        assert coverage_metric([(1, 1)], [(1, 1)], weak=True) == 1.0
        assert coverage_metric([(1, 1)], [(1, 1)], weak=False) == 0.0

    def test_empty_b(self):
        with pytest.raises(EmptyFrontError):
            coverage_metric([(1, 1)], np.zeros((0, 2)))

    def test_against_double_loop(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            A = rng.integers(0, 5, size=(int(rng.integers(1, 10)), 2)).astype(float)
            B = rng.integers(0, 5, size=(int(rng.integers(1, 10)), 2)).astype(float)
            for weak in (True, False):
                assert coverage_metric(A, B, weak) == brute_force_coverage(A, B, weak)


class TestScalarization:
    def test_weighted_sum(self):
        assert weighted_sum_scalarize((2, 4), (0.5, 0.5)) == 3.0

    def test_chebyshev(self):
        assert chebyshev_scalarize((3, 7), (1, 0), (1, 2)) == 2.0

    def test_chebyshev_at_ideal(self):
        assert chebyshev_scalarize((1, 2), (0.3, 0.7), (1, 2)) == 0.0


class TestWeightVectors:
    def test_lattice_three(self):
        ws = build_weight_vectors(3, 2, 1)
        np.testing.assert_allclose(ws.vectors, [(0, 1), (0.5, 0.5), (1, 0)])

    def test_t_one_is_self(self):
        ws = build_weight_vectors(6, 2, 1)
        assert ws.neighbors[:, 0].tolist() == list(range(6))

    def test_t_full(self):
        ws = build_weight_vectors(5, 2, 5)
        for row in ws.neighbors:
            assert sorted(row.tolist()) == list(range(5))

    def test_three_objectives_36(self):
        ws = build_weight_vectors(40, 3, 10)
        assert len(ws) == 36
        np.testing.assert_allclose(ws.vectors.sum(axis=1), 1.0)

    def test_lattice_complete(self):
        pts = {tuple(np.round(v * 4).astype(int)) for v in simplex_lattice(4, 3)}
        oracle = {c for c in itertools.product(range(5), repeat=3) if sum(c) == 4}
        assert pts == oracle

    def test_too_small(self):
        with pytest.raises(NTooSmallError):
            build_weight_vectors(1, 2, 1)
