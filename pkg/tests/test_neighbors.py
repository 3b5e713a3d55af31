"""Distance metric, VDM table, neighbor cache and its queries."""

import numpy as np
import pytest

from mlbalance import (
    CacheError,
    DataFormatError,
    FeatureSpec,
    build_dataset,
    build_neighbor_cache,
    build_vdm_table,
    distance,
    knn,
    load_cache,
    reverse_neighbors,
    save_cache,
)

from oracles import SyntheticSpec, brute_force_knn, make_synthetic, pairwise_distance

NUM = FeatureSpec("x", "numeric")


def numeric_line(values, labels=None):
    rows = [([float(v)], labels[i] if labels else [1])
            for i, v in enumerate(values)]
    n_labels = len(labels[0]) if labels else 1
    return build_dataset(
        [NUM], [f"l{i}" for i in range(n_labels)], rows
    )


class TestVdmTable:
    def test_all_numeric_dataset_gives_empty_table(self, emotions):
        assert build_vdm_table(emotions).is_empty

    def test_identical_label_distributions_share_columns(self):
        spec = FeatureSpec("c", "nominal", ("x", "y", "z"))
        rows = [
            (["x"], [1, 0]), (["x"], [0, 1]),
            (["y"], [1, 0]), (["y"], [0, 1]),
            (["z"], [1, 1]),
        ]
        ds = build_dataset([spec], ["a", "b"], rows)
        table = build_vdm_table(ds)
        probs = table.probabilities[0]
        np.testing.assert_array_equal(probs[0], probs[1])

    def test_hand_counted_probabilities(self):
        spec = FeatureSpec("c", "nominal", ("x", "y"))
        rows = [
            (["x"], [1, 0]),
            (["x"], [1, 1]),
            (["x"], [0, 0]),
            (["y"], [0, 1]),
        ]
        ds = build_dataset([spec], ["a", "b"], rows)
        table = build_vdm_table(ds)
        np.testing.assert_allclose(
            table.probabilities[0],
            [[2 / 3, 1 / 3], [0.0, 1.0]],
        )
        assert table.occurrences[0].tolist() == [3.0, 1.0]

    def test_unseen_domain_value_gets_zero_probabilities(self):
        spec = FeatureSpec("c", "nominal", ("x", "y", "never"))
        rows = [(["x"], [1]), (["y"], [1])]
        ds = build_dataset([spec], ["a"], rows)
        table = build_vdm_table(ds)
        assert table.probabilities[0][2].tolist() == [0.0]
        assert table.occurrences[0][2] == 0.0


class TestDistance:
    def test_identical_instances(self):
        ds = numeric_line([2.0, 2.0, 5.0])
        assert distance(ds, 0, 1) == 0.0

    def test_normalized_two_feature_diagonal(self):
        specs = [FeatureSpec("a", "numeric"), FeatureSpec("b", "numeric")]
        rows = [([0.0, 0.0], [1]), ([3.0, 4.0], [1])]
        ds = build_dataset(specs, ["l"], rows)
        assert distance(ds, 0, 1) == pytest.approx(np.sqrt(2.0))

    def test_pure_nominal_unit_distance(self):
        spec = FeatureSpec("c", "nominal", ("x", "y"))
        rows = [(["x"], [1]), (["x"], [1]), (["y"], [0])]
        ds = build_dataset([spec], ["a"], rows)
        # p(a|x) = 1, p(a|y) = 0
        assert distance(ds, 0, 2) == pytest.approx(1.0)

    def test_constant_feature_contributes_nothing(self):
        specs = [FeatureSpec("a", "numeric"), FeatureSpec("b", "numeric")]
        rows = [([1.0, 7.0], [1]), ([1.0, 9.0], [1])]
        ds = build_dataset(specs, ["l"], rows)
        assert distance(ds, 0, 1) == pytest.approx(1.0)

    def test_metric_axioms_on_mixed_data(self):
        ds = make_synthetic(SyntheticSpec(
            instances=12, numeric_features=2, nominal_features=2,
            labels=3, frequencies=(0.5, 0.3, 0.2), seed=5,
        ))
        vdm = build_vdm_table(ds)
        for a in range(12):
            assert distance(ds, a, a, vdm) == 0.0
            for b in range(a + 1, 12):
                d1 = distance(ds, a, b, vdm)
                d2 = distance(ds, b, a, vdm)
                assert d1 == d2 >= 0.0


class TestCacheBuild:
    def test_three_collinear_points(self):
        ds = numeric_line([0.0, 1.0, 10.0])
        cache = build_neighbor_cache(ds)
        assert cache.indices[0].tolist() == [1, 2]
        assert cache.indices[1].tolist() == [0, 2]
        assert cache.indices[2].tolist() == [1, 0]

    def test_insufficient_instances(self):
        ds = numeric_line([1.0])
        with pytest.raises(CacheError, match="insufficient"):
            build_neighbor_cache(ds)

    def test_depth_validation(self):
        ds = numeric_line([0.0, 1.0, 2.0])
        with pytest.raises(CacheError):
            build_neighbor_cache(ds, depth=3)

    def test_ranking_soundness(self):
        ds = make_synthetic(SyntheticSpec(
            instances=40, numeric_features=3, nominal_features=1,
            labels=3, frequencies=(0.6, 0.3, 0.2), seed=11,
        ))
        cache = build_neighbor_cache(ds)
        for i in range(40):
            row, dists = cache.indices[i], cache.distances[i]
            assert i not in row
            assert sorted(row.tolist() + [i]) == list(range(40))
            for u in range(len(row) - 1):
                assert (dists[u] < dists[u + 1]) or (
                    dists[u] == dists[u + 1] and row[u] < row[u + 1]
                )

    def test_duplicate_instances_tie_by_index(self):
        ds = numeric_line([5.0, 5.0, 5.0, 6.0])
        cache = build_neighbor_cache(ds)
        assert cache.indices[3].tolist() == [0, 1, 2]
        assert cache.indices[1].tolist() == [0, 2, 3]

    def test_matches_brute_force_oracle(self):
        ds = make_synthetic(SyntheticSpec(
            instances=50, numeric_features=3, nominal_features=2,
            labels=4, frequencies=(0.7, 0.4, 0.25, 0.1), seed=3,
        ))
        cache = build_neighbor_cache(ds)
        for i in range(50):
            expected = brute_force_knn(ds, i, 49)
            assert cache.indices[i].tolist() == expected

    def test_parallel_builds_identical(self):
        ds = make_synthetic(SyntheticSpec(
            instances=600, numeric_features=4, labels=3,
            frequencies=(0.5, 0.25, 0.1), seed=9,
        ))
        one = build_neighbor_cache(ds, workers=1)
        two = build_neighbor_cache(ds, workers=2)
        four = build_neighbor_cache(ds, workers=4)
        np.testing.assert_array_equal(one.indices, two.indices)
        np.testing.assert_array_equal(one.distances, two.distances)
        np.testing.assert_array_equal(one.indices, four.indices)
        np.testing.assert_array_equal(one.distances, four.distances)

    def test_progress_is_monotonic_and_complete(self):
        ds = make_synthetic(SyntheticSpec(
            instances=300, numeric_features=2, labels=2,
            frequencies=(0.5, 0.2), seed=1,
        ))
        fractions = []
        build_neighbor_cache(ds, workers=2, progress=fractions.append)
        assert fractions == sorted(fractions)
        assert fractions[-1] == pytest.approx(1.0)


@pytest.fixture(scope="module")
def mixed():
    ds = make_synthetic(SyntheticSpec(
        instances=30, numeric_features=2, nominal_features=1,
        labels=3, frequencies=(0.6, 0.4, 0.2), seed=21,
    ))
    return ds, build_neighbor_cache(ds)


class TestKnnQueries:
    def test_full_ranking(self, mixed):
        ds, cache = mixed
        assert knn(cache, 4, 29).tolist() == cache.indices[4].tolist()

    def test_bag_of_self_is_empty(self, mixed):
        _, cache = mixed
        assert knn(cache, 4, 3, bag={4}).size == 0

    def test_bag_requires_membership(self, mixed):
        _, cache = mixed
        with pytest.raises(ValueError):
            knn(cache, 4, 3, bag={1, 2})

    def test_bag_restricted_matches_oracle(self, mixed):
        ds, cache = mixed
        bag = [1, 4, 7, 9, 13, 22, 28]
        for i in bag:
            got = knn(cache, i, 3, bag=bag).tolist()
            assert got == brute_force_knn(ds, i, 3, bag=bag)

    def test_truncated_cache_falls_back_for_bags(self, mixed):
        ds, cache = mixed
        shallow = build_neighbor_cache(ds, depth=2)
        bag = list(range(0, 30, 2))
        for i in bag:
            got = knn(shallow, i, 4, bag=bag).tolist()
            assert got == brute_force_knn(ds, i, 4, bag=bag)

    def test_fewer_than_k_returned(self, mixed):
        _, cache = mixed
        assert len(knn(cache, 0, 10, bag={0, 5, 9})) == 2

    def test_fingerprint_checked(self, mixed, emotions):
        _, cache = mixed
        with pytest.raises(CacheError):
            knn(cache, 0, 3, dataset=emotions)


class TestReverseNeighbors:
    def test_mutual_pair(self):
        ds = numeric_line([0.0, 1.0, 50.0, 51.0])
        cache = build_neighbor_cache(ds)
        reverse = reverse_neighbors(cache, 1)
        assert 1 in reverse[0] and 0 in reverse[1]
        assert 3 in reverse[2] and 2 in reverse[3]

    def test_isolated_point_has_empty_set(self):
        ds = numeric_line([0.0, 0.5, 1.0, 100.0])
        cache = build_neighbor_cache(ds)
        reverse = reverse_neighbors(cache, 1)
        assert reverse[3] == set()

    def test_five_point_hand_adjacency(self):
        ds = numeric_line([0.0, 1.0, 3.0, 7.0, 8.0])
        cache = build_neighbor_cache(ds)
        reverse = reverse_neighbors(cache, 1)
        # 1-NN: 0->1, 1->0, 2->1, 3->4, 4->3
        assert reverse == {0: {1}, 1: {0, 2}, 2: set(), 3: {4}, 4: {3}}

    def test_inverts_knn(self):
        ds = make_synthetic(SyntheticSpec(
            instances=25, numeric_features=3, labels=2,
            frequencies=(0.5, 0.2), seed=31,
        ))
        cache = build_neighbor_cache(ds)
        k = 4
        reverse = reverse_neighbors(cache, k)
        for q in range(25):
            for target in knn(cache, q, k):
                assert q in reverse[int(target)]

    def test_bag_restriction(self):
        ds = numeric_line([0.0, 1.0, 2.0, 3.0, 4.0])
        cache = build_neighbor_cache(ds)
        bag = [0, 2, 4]
        reverse = reverse_neighbors(cache, 1, bag=bag)
        assert set(reverse) == set(bag)
        assert all(v <= set(bag) for v in reverse.values())


class TestPersistence:
    def test_round_trip(self, tmp_path):
        ds = make_synthetic(SyntheticSpec(
            instances=20, numeric_features=2, nominal_features=1,
            labels=2, frequencies=(0.5, 0.25), seed=2,
        ))
        cache = build_neighbor_cache(ds)
        path = save_cache(cache, tmp_path / "cache.bin")
        loaded = load_cache(path, ds)
        np.testing.assert_array_equal(loaded.indices, cache.indices)
        np.testing.assert_array_equal(loaded.distances, cache.distances)
        assert loaded.depth == cache.depth

    def test_fingerprint_mismatch(self, tmp_path, emotions):
        ds = make_synthetic(SyntheticSpec(
            instances=10, numeric_features=2, labels=2,
            frequencies=(0.5, 0.25), seed=2,
        ))
        path = save_cache(build_neighbor_cache(ds), tmp_path / "cache.bin")
        with pytest.raises(CacheError):
            load_cache(path, emotions)

    def test_rejects_foreign_file(self, tmp_path):
        ds = make_synthetic(SyntheticSpec(
            instances=10, numeric_features=2, labels=2,
            frequencies=(0.5, 0.25), seed=2,
        ))
        bogus = tmp_path / "bogus.bin"
        bogus.write_bytes(b"not a cache")
        with pytest.raises(DataFormatError):
            load_cache(bogus, ds)


def test_oracle_distance_agrees_with_module_metric():
    ds = make_synthetic(SyntheticSpec(
        instances=15, numeric_features=2, nominal_features=2,
        labels=3, frequencies=(0.5, 0.3, 0.2), seed=17,
    ))
    vdm = build_vdm_table(ds)
    for a in range(0, 15, 3):
        for b in range(1, 15, 4):
            assert distance(ds, a, b, vdm) == pytest.approx(
                pairwise_distance(ds, a, b), abs=1e-12
            )
