"""Clustering analyzers and the analyzer registry."""

import numpy as np
import pytest

from oracles import check_dbscan_labels, dbscan_oracle, kmeans_exhaustive
from quenchwatch.analyzers import (
    AnalyzerResult,
    KTooLarge,
    available_analyzers,
    dbscan,
    get_analyzer,
    kmeans,
    register,
)
from quenchwatch.signals import FeatureVector


def partition(assignments) -> set[frozenset]:
    groups: dict[int, set[int]] = {}
    for i, label in enumerate(assignments):
        groups.setdefault(label, set()).add(i)
    return {frozenset(g) for g in groups.values()}


class TestKmeans:
    def test_two_obvious_clusters_on_a_line(self):
        result = kmeans([0.0, 1.0, 10.0, 11.0], k=2)
        assert partition(result.assignments) == {frozenset({0, 1}), frozenset({2, 3})}
        centers = sorted(c[0] for c in result.metadata["centers"])
        assert centers == [0.5, 10.5]
        assert result.metadata["inertia"] == pytest.approx(1.0)

    def test_k_equals_n_gives_zero_inertia(self, rng):
        pts = rng.normal(size=(5, 3))
        result = kmeans(list(pts), k=5)
        assert sorted(result.assignments) == [0, 1, 2, 3, 4]
        assert result.metadata["inertia"] == pytest.approx(0.0, abs=1e-24)

    def test_identical_points_single_cluster(self):
        result = kmeans([2.5] * 6, k=1)
        assert result.assignments == [0] * 6
        assert result.metadata["inertia"] == 0.0

    def test_k_larger_than_point_count(self):
        with pytest.raises(KTooLarge):
            kmeans([1.0, 2.0], k=3)

    def test_k_below_one(self):
        with pytest.raises(ValueError):
            kmeans([1.0, 2.0], k=0)

    def test_non_finite_points_rejected(self):
        with pytest.raises(ValueError):
            kmeans([1.0, float("nan")], k=1)

    def test_ragged_points_rejected(self):
        with pytest.raises(ValueError):
            kmeans([[1.0, 2.0], [3.0]], k=1)

    def test_deterministic_for_seed(self, rng):
        pts = [list(p) for p in rng.normal(size=(12, 2))]
        a = kmeans(pts, k=3, seed=5)
        b = kmeans(pts, k=3, seed=5)
        assert a.assignments == b.assignments
        assert a.metadata["centers"] == b.metadata["centers"]

    def test_accepts_feature_vectors(self):
        fvs = [
            FeatureVector(mean=m, min=m, max=m, skewness=0, kurtosis=0, slope=0, stderr=0)
            for m in (0.0, 0.1, 9.0, 9.1)
        ]
        result = kmeans(fvs, k=2)
        assert partition(result.assignments) == {frozenset({0, 1}), frozenset({2, 3})}

    def test_matches_exhaustive_optimum_on_small_sets(self, rng):
        for trial in range(25):
            n = int(rng.integers(3, 9))
            k = int(rng.integers(2, min(n, 4) + 1))
            pts = rng.uniform(-5, 5, size=(n, 2))
            result = kmeans([list(p) for p in pts], k=k, seed=trial)
            best_inertia, _ = kmeans_exhaustive([list(p) for p in pts], k)
            # Restarted Lloyd iteration can stop in a local optimum, never
            # better than the exhaustive one.
            assert result.metadata["inertia"] >= best_inertia - 1e-9

    def test_restarts_find_global_optimum_on_separated_data(self, rng):
        offsets = np.array([0.0, 100.0, 200.0])
        pts = np.concatenate([o + rng.uniform(-1, 1, 3) for o in offsets])
        result = kmeans(list(pts), k=3, seed=0)
        best_inertia, best_partition = kmeans_exhaustive(list(pts), 3)
        assert result.metadata["inertia"] == pytest.approx(best_inertia, rel=1e-9)
        assert partition(result.assignments) == best_partition


class TestDbscan:
    def test_chain_cluster_and_outlier(self):
        result = dbscan([0.0, 1.0, 2.0, 10.0], eps=1.5, min_pts=2)
        assert result.assignments == [0, 0, 0, -1]
        assert result.metadata["cluster_count"] == 1

    def test_radius_is_inclusive(self):
        # Exactly eps apart still counts as reachable.
        result = dbscan([0.0, 1.0], eps=1.0, min_pts=2)
        assert result.assignments == [0, 0]

    def test_all_noise_when_sparse(self):
        result = dbscan([0.0, 10.0, 20.0], eps=1.0, min_pts=2)
        assert result.assignments == [-1, -1, -1]
        assert result.metadata["cluster_count"] == 0

    def test_min_pts_one_makes_every_point_core(self):
        result = dbscan([0.0, 10.0, 20.0], eps=1.0, min_pts=1)
        assert result.assignments == [0, 1, 2]

    def test_two_dimensional_clusters(self, rng):
        a = rng.normal(loc=(0, 0), scale=0.1, size=(8, 2))
        b = rng.normal(loc=(5, 5), scale=0.1, size=(8, 2))
        pts = [list(p) for p in np.concatenate([a, b])]
        result = dbscan(pts, eps=1.0, min_pts=3)
        assert partition(result.assignments) == {frozenset(range(8)), frozenset(range(8, 16))}

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            dbscan([1.0], eps=0.0, min_pts=1)
        with pytest.raises(ValueError):
            dbscan([1.0], eps=1.0, min_pts=0)

    def test_labels_satisfy_reachability_on_random_sets(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 21))
            dim = int(rng.integers(1, 3))
            pts = [list(p) for p in rng.uniform(-3, 3, size=(n, dim))]
            eps = float(rng.uniform(0.3, 2.5))
            min_pts = int(rng.integers(1, 5))
            result = dbscan(pts, eps=eps, min_pts=min_pts)
            problems = check_dbscan_labels(pts, eps, min_pts, result.assignments)
            assert problems == [], problems

    def test_core_partition_invariant_under_permutation(self, rng):
        # With min_pts=1 every point is core and there are no border points,
        # so the cluster partition is a pure function of the geometry.
        pts = [list(p) for p in rng.uniform(-2, 2, size=(15, 2))]
        base = dbscan(pts, eps=0.8, min_pts=1)
        perm = rng.permutation(15)
        shuffled = dbscan([pts[int(i)] for i in perm], eps=0.8, min_pts=1)
        mapped = {frozenset(int(perm[i]) for i in group) for group in partition(shuffled.assignments)}
        assert mapped == partition(base.assignments)

    def test_matches_oracle_components(self, rng):
        pts = [list(p) for p in rng.uniform(-2, 2, size=(12, 2))]
        eps, min_pts = 1.0, 3
        result = dbscan(pts, eps=eps, min_pts=min_pts)
        oracle = dbscan_oracle(pts, eps, min_pts)
        assert {i for i, l in enumerate(result.assignments) if l == -1} == oracle["noise"]
        core_partition = {
            frozenset(i for i in comp) for comp in oracle["components"]
        }
        got_core = {
            frozenset(i for i in range(12) if result.assignments[i] == c and i in oracle["core"])
            for c in set(result.assignments) if c >= 0
        }
        assert got_core == core_partition


class TestRegistry:
    def test_builtin_analyzers_listed(self):
        names = available_analyzers()
        assert "kmeans" in names and "dbscan" in names and "quench-prediction" in names
        assert names == sorted(names)

    def test_lookup_returns_callable(self):
        assert get_analyzer("kmeans") is kmeans
        assert get_analyzer("dbscan") is dbscan

    def test_unknown_name(self):
        with pytest.raises(KeyError) as exc:
            get_analyzer("does-not-exist")
        assert "kmeans" in str(exc.value)

    def test_extension_point_accepts_new_analyzer(self):
        @register("test-null-analyzer")
        def null_analyzer(points):
            return AnalyzerResult(kind="clustering", assignments=[0] * len(points), metadata={})

        try:
            assert get_analyzer("test-null-analyzer") is null_analyzer
            result = get_analyzer("test-null-analyzer")([1, 2, 3])
            assert result.assignments == [0, 0, 0]
        finally:
            from quenchwatch.analyzers.base import _REGISTRY
            _REGISTRY.pop("test-null-analyzer", None)

    def test_duplicate_registration_rejected(self):
        with pytest.raises(ValueError):
            register("kmeans")(lambda points: None)


class TestAnalyzerResult:
    def test_clustering_requires_assignments(self):
        with pytest.raises(ValueError):
            AnalyzerResult(kind="clustering", metadata={})

    def test_prediction_requires_scores(self):
        with pytest.raises(ValueError):
            AnalyzerResult(kind="prediction", metadata={})

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            AnalyzerResult(kind="regression", assignments=[0], metadata={})

    def test_as_dict_is_json_ready(self):
        result = AnalyzerResult(kind="clustering", assignments=[0, 1], metadata={"k": 2})
        d = result.as_dict()
        assert d["kind"] == "clustering"
        assert d["assignments"] == [0, 1]
        assert d["metadata"] == {"k": 2}
