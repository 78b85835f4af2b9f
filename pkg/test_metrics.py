# test_metrics.py - Clustering metrics, consensus predicate and similarity diagnostics
from itertools import combinations, permutations

import numpy as np
import pytest

from core.errors import ShapeError
from core.models import PrototypeSet
from utils.diagnostics import representation_diagnostics, similarity_entropy, similarity_matrix, write_heatmap
from utils.metrics import (
    ari, clustering_accuracy, consensus_rate, evaluate, nmi, paired_consensus_rate, semantic_consensus,
)


def brute_force_accuracy(pred, truth, k):
    best = 0
    for perm in permutations(range(k)):
        best = max(best, int((np.asarray(perm)[pred] == truth).sum()))
    return best / len(pred)


def pair_counting_ari(pred, truth):
    a = b = c = d = 0
    for i, j in combinations(range(len(pred)), 2):
        same_pred, same_truth = pred[i] == pred[j], truth[i] == truth[j]
        a += same_pred and same_truth
        b += same_pred and not same_truth
        c += same_truth and not same_pred
        d += not same_pred and not same_truth
    denominator = (a + b) * (b + d) + (a + c) * (c + d)
    return None if denominator == 0 else 2.0 * (a * d - b * c) / denominator


# ============================================================================
# ACCURACY
# ============================================================================

def test_accuracy_identity_and_relabeling():
    truth = np.array([0, 0, 1, 1, 2, 2])
    assert clustering_accuracy(truth, truth, 3) == 1.0
    assert clustering_accuracy(np.array([2, 2, 0, 0, 1, 1]), truth, 3) == 1.0


def test_accuracy_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(100):
        k = int(rng.integers(1, 6))
        n = int(rng.integers(1, 30))
        pred, truth = rng.integers(0, k, n), rng.integers(0, k, n)
        assert clustering_accuracy(pred, truth, k) == brute_force_accuracy(pred, truth, k)


def test_accuracy_pads_unused_predicted_labels():
    assert clustering_accuracy(np.zeros(4, dtype=int), np.array([0, 0, 0, 1]), 2) == 0.75


def test_accuracy_length_mismatch():
    with pytest.raises(ShapeError):
        clustering_accuracy([0, 1], [0], 2)


# ============================================================================
# NMI AND ARI
# ============================================================================

def test_nmi_examples():
    truth = np.array([0, 0, 1, 1, 2])
    assert nmi(truth, truth) == pytest.approx(1.0)
    assert nmi(np.array([0, 1, 0, 1]), np.array([0, 0, 1, 1])) == pytest.approx(0.0, abs=1e-9)
    assert nmi(np.zeros(4, dtype=int), np.array([0, 0, 1, 1])) == 0.0


def test_nmi_hand_case():
    pred = np.array([0, 0, 1, 1, 2, 2])
    truth = np.array([0, 0, 0, 1, 1, 1])
    joint = np.zeros((3, 2))
    np.add.at(joint, (pred, truth), 1.0 / 6)
    p_pred, p_truth = joint.sum(axis=1), joint.sum(axis=0)
    nz = joint > 0
    mutual = (joint[nz] * np.log(joint[nz] / np.outer(p_pred, p_truth)[nz])).sum()
    entropy = -(p_pred * np.log(p_pred)).sum() - (p_truth * np.log(p_truth)).sum()
    assert nmi(pred, truth) == pytest.approx(mutual / (entropy / 2), abs=1e-12)


def test_ari_examples():
    truth = np.array([0, 0, 1, 1])
    assert ari(truth, truth) == 1.0
    assert ari(np.zeros(4, dtype=int), truth) == pytest.approx(0.0)


def test_ari_matches_pair_counting():
    rng = np.random.default_rng(1)
    checked = 0
    for _ in range(50):
        pred, truth = rng.integers(0, 3, 8), rng.integers(0, 3, 8)
        expected = pair_counting_ari(pred, truth)
        if expected is None:
            continue
        assert ari(pred, truth) == pytest.approx(expected, abs=1e-12)
        checked += 1
    assert checked > 40


def test_nmi_and_ari_are_symmetric():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a, b = rng.integers(0, 4, 15), rng.integers(0, 3, 15)
        assert nmi(a, b) == pytest.approx(nmi(b, a), abs=1e-12)
        assert ari(a, b) == pytest.approx(ari(b, a), abs=1e-12)


def test_evaluate_report():
    report = evaluate([1, 1, 0, 0], [0, 0, 1, 1], 2)
    assert (report.acc, report.n, report.k) == (1.0, 4, 2)
    assert report.nmi == pytest.approx(1.0)
    assert report.get_formatted_summary() == "ACC 100.00  NMI 100.00  ARI 100.00"


# ============================================================================
# SEMANTIC CONSENSUS
# ============================================================================

def test_semantic_consensus_examples():
    c = np.eye(3)
    assert semantic_consensus(c[1], c[1], c)
    assert not semantic_consensus(c[0], c[1], c)
    # ties resolve to the lower prototype index
    tie = np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0)
    assert semantic_consensus(tie, c[0], c)


def test_paired_consensus_rate_counts_paired_rows():
    c = PrototypeSet(prototypes=np.eye(2))
    a = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [np.nan, np.nan]])
    b = np.array([[1.0, 0.0], [1.0, 0.0], [np.nan, np.nan], [0.0, 1.0]])
    mask = np.array([[1, 1], [1, 1], [1, 0], [0, 1]], dtype=bool)
    assert paired_consensus_rate([a, b], mask, c) == 0.5


def test_paired_consensus_rate_without_pairs_is_nan():
    c = PrototypeSet(prototypes=np.eye(2))
    views = [np.array([[1.0, 0.0], [np.nan, np.nan]]), np.array([[np.nan, np.nan], [0.0, 1.0]])]
    assert np.isnan(paired_consensus_rate(views, np.array([[1, 0], [0, 1]], dtype=bool), c))


def test_consensus_rate_is_a_fraction(toy_dataset, tiny_state):
    c = PrototypeSet(prototypes=np.eye(2, 4))
    rate = consensus_rate(tiny_state, toy_dataset, c)
    assert 0.0 <= rate <= 1.0


# ============================================================================
# SIMILARITY DIAGNOSTICS
# ============================================================================

def test_similarity_of_identical_rows_is_all_ones():
    sim, order = similarity_matrix(np.tile([0.3, 0.4], (5, 1)))
    assert np.allclose(sim, 1.0)
    assert order.tolist() == list(range(5))
    assert similarity_entropy(sim) == pytest.approx(np.log(5))


def test_similarity_blocks_follow_label_order():
    h = np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [0.0, 1.0]])
    sim, order = similarity_matrix(h, order_by=np.array([0, 1, 0, 1]))
    assert order.tolist() == [0, 2, 1, 3]
    expected = np.kron(np.eye(2), np.ones((2, 2)))
    assert np.allclose(sim, expected)


def test_similarity_matrix_symmetric_unit_diagonal():
    sim, _ = similarity_matrix(np.random.default_rng(3).normal(size=(9, 4)))
    assert np.array_equal(sim, sim.T)
    assert np.allclose(np.diag(sim), 1.0, atol=1e-9)
    assert (np.abs(sim) <= 1.0).all()


def test_write_heatmap_files(tmp_path):
    sim, _ = similarity_matrix(np.random.default_rng(4).normal(size=(6, 3)))
    paths = write_heatmap(sim, tmp_path, "demo")
    assert paths['csv'].name == "sim_demo.csv"
    assert np.loadtxt(paths['csv'], delimiter=",").shape == (6, 6)
    assert paths['image'].stat().st_size > 0


def test_representation_diagnostics_writes_every_family(tmp_path, toy_dataset, tiny_state):
    entropies = representation_diagnostics(tiny_state, toy_dataset, tmp_path, tag="toy")
    assert set(entropies) == {'H', 'Z', 'Z0', 'H0', 'Z1', 'H1'}
    assert (tmp_path / "sim_toy_H.png").is_file()
    assert np.loadtxt(tmp_path / "sim_toy_Z0.csv", delimiter=",").shape == (11, 11)

    only_consensus = representation_diagnostics(tiny_state, toy_dataset, tmp_path / "h", all_families=False)
    assert set(only_consensus) == {'H'}
