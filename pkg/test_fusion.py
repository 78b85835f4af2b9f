# test_fusion.py - Completeness weights, fusion, k-means and prototypes
from itertools import product

import numpy as np
import pytest

from clustering.fusion import anchor_rows, completeness_weights, consensus_prototypes, fuse, per_view_prototypes
from clustering.kmeans import inertia, kmeans
from core.errors import ClusteringError, ContractViolationError, NonFiniteError
from utils.metrics import clustering_accuracy


# ============================================================================
# FUSION
# ============================================================================

def test_completeness_weights_examples():
    mask = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=bool)
    weights = completeness_weights(mask).weights
    assert weights.tolist() == [[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 1.0, 0.0]]
    assert (weights.sum(axis=1) == 1.0).all()


def test_completeness_weights_rejects_empty_row():
    with pytest.raises(ContractViolationError):
        completeness_weights(np.array([[1, 0], [0, 0]], dtype=bool))


def test_fuse_is_mean_of_observed_rows():
    a = np.array([[1.0, 0.0], [2.0, 2.0], [1.0, 1.0]])
    b = np.array([[0.0, 1.0], [np.nan, np.nan], [3.0, 3.0]])
    c = np.array([[np.nan, np.nan], [np.nan, np.nan], [5.0, 5.0]])
    mask = np.array([[1, 1, 0], [1, 0, 0], [1, 1, 1]], dtype=bool)

    fused = fuse([a, b, c], completeness_weights(mask))
    assert fused[0].tolist() == [0.5, 0.5]
    assert fused[1].tolist() == [2.0, 2.0]
    assert np.allclose(fused[2], [3.0, 3.0])


def test_fuse_full_mask_equals_mean_and_ignores_view_order():
    rng = np.random.default_rng(0)
    views = [rng.normal(size=(20, 4)) for _ in range(3)]
    mask = np.ones((20, 3), dtype=bool)
    weights = completeness_weights(mask)

    fused = fuse(views, weights)
    assert np.allclose(fused, np.mean(views, axis=0), atol=1e-12)
    assert np.allclose(fuse(views[::-1], weights), fused, atol=1e-12)


# ============================================================================
# K-MEANS
# ============================================================================

def test_kmeans_distinct_points_are_their_own_centroids():
    points = np.array([[0.0, 0.0], [5.0, 1.0], [-3.0, 4.0]])
    centroids, labels = kmeans(points, 3, seed=0, n_init=1)
    assert np.allclose(centroids[labels], points)
    assert sorted(labels.tolist()) == [0, 1, 2]


def test_kmeans_one_dimensional_example():
    points = np.array([[0.0], [0.1], [10.0], [10.1]])
    centroids, labels = kmeans(points, 2, seed=0)
    assert np.allclose(np.sort(centroids[:, 0]), [0.05, 10.05])
    assert labels[0] == labels[1] != labels[2] == labels[3]


def test_kmeans_single_cluster_is_mean():
    points = np.random.default_rng(1).normal(size=(15, 3))
    centroids, labels = kmeans(points, 1)
    assert np.allclose(centroids[0], points.mean(axis=0))
    assert not labels.any()


def test_kmeans_is_deterministic():
    points = np.random.default_rng(2).normal(size=(40, 2))
    first = kmeans(points, 3, seed=5)
    second = kmeans(points, 3, seed=5)
    assert np.array_equal(first[0], second[0])
    assert np.array_equal(first[1], second[1])


def test_kmeans_errors():
    with pytest.raises(ClusteringError):
        kmeans(np.zeros((2, 2)), 3)
    with pytest.raises(NonFiniteError):
        kmeans(np.array([[0.0], [np.nan], [1.0]]), 2)


def test_kmeans_inertia_non_increasing_over_iterations():
    points = np.random.default_rng(3).normal(size=(60, 2))
    values = []
    for max_iter in range(1, 6):
        centroids, labels = kmeans(points, 4, seed=0, max_iter=max_iter, tol=0.0, n_init=1)
        values.append(inertia(points, centroids, labels))
    assert all(later <= earlier + 1e-9 for earlier, later in zip(values, values[1:]))


def brute_force_inertia(points: np.ndarray, k: int) -> float:
    best = np.inf
    for assignment in product(range(k), repeat=len(points)):
        assignment = np.asarray(assignment)
        cost = 0.0
        for c in np.unique(assignment):
            members = points[assignment == c]
            cost += ((members - members.mean(axis=0)) ** 2).sum()
        best = min(best, cost)
    return best


def test_kmeans_within_quality_floor_of_brute_force():
    rng = np.random.default_rng(4)
    for case in range(10):
        m, k = int(rng.integers(4, 8)), int(rng.integers(2, 4))
        points = rng.normal(size=(m, 2))
        centroids, labels = kmeans(points, k, seed=case)
        assert inertia(points, centroids, labels) <= 1.5 * brute_force_inertia(points, k) + 1e-9


# ============================================================================
# PROTOTYPES
# ============================================================================

def test_consensus_prototypes_recover_clustered_unit_vectors():
    reps = np.repeat(np.eye(3), 4, axis=0)
    prototypes = consensus_prototypes(reps, 3, seed=0)
    order = np.argsort(np.argmax(prototypes.prototypes, axis=1))
    assert np.allclose(prototypes.prototypes[order], np.eye(3))


def test_consensus_prototypes_are_deterministic_and_unit_norm():
    reps = np.random.default_rng(5).normal(size=(30, 4))
    first = consensus_prototypes(reps, 3, seed=9)
    second = consensus_prototypes(reps, 3, seed=9)
    assert np.array_equal(first.prototypes, second.prototypes)
    assert np.allclose(np.linalg.norm(first.prototypes, axis=1), 1.0)


def test_consensus_prototypes_separate_blobs_on_sphere():
    rng = np.random.default_rng(6)
    truth = np.repeat([0, 1], 25)
    centers = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    reps = centers[truth] + rng.normal(scale=0.05, size=(50, 3))
    reps /= np.linalg.norm(reps, axis=1, keepdims=True)

    prototypes = consensus_prototypes(reps, 2, seed=0).prototypes
    nearest = np.argmax(reps @ prototypes.T, axis=1)
    assert clustering_accuracy(nearest, truth, 2) == 1.0


def test_anchor_rows_are_the_complete_instances():
    mask = np.array([[1, 1], [1, 0], [1, 1], [0, 1]], dtype=bool)
    assert anchor_rows(mask, 2).tolist() == [0, 2]
    assert anchor_rows(mask, 3).tolist() == [0, 1, 2, 3]


def test_prototypes_on_anchor_rows_separate_clusters_not_missing_patterns():
    rng = np.random.default_rng(11)
    truth = np.tile([0, 1], 30)
    mask = np.ones((60, 2), dtype=bool)
    mask[20:40, 1] = False
    mask[40:, 0] = False

    signal = np.array([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, -1.0, 0.0]])[truth]
    offsets = [np.array([10.0, 0.0, 0.0, 0.0]), np.array([0.0, 10.0, 0.0, 0.0])]
    reps = [offset + signal + rng.normal(scale=0.05, size=(60, 4)) for offset in offsets]
    fused = fuse(reps, completeness_weights(mask))

    prototypes = consensus_prototypes(fused[anchor_rows(mask, 2)], 2, seed=0).prototypes
    nearest = np.argmax(fused @ prototypes.T, axis=1)
    assert clustering_accuracy(nearest, truth, 2) == 1.0


def test_per_view_prototypes_names_short_view():
    views = [np.eye(3), np.eye(3)[:1]]
    with pytest.raises(ClusteringError, match="view 1"):
        per_view_prototypes(views, 2)


def test_per_view_prototypes_one_matrix_per_view():
    rng = np.random.default_rng(7)
    views = [rng.normal(size=(10, 3)), rng.normal(size=(8, 3))]
    prototypes = per_view_prototypes(views, 2, seed=0)
    assert [p.shape for p in prototypes] == [(2, 3), (2, 3)]
