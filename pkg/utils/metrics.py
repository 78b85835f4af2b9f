# utils/metrics.py - Clustering metrics and the semantic-consensus check
import logging
from itertools import combinations

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score

from core.errors import ShapeError
from core.models import MetricReport, MultiViewDataset, PrototypeSet
from nets.model import ModelState, represent

logger = logging.getLogger(__name__)


def _check_pair(pred, truth):
    pred = np.asarray(pred, dtype=np.int64).reshape(-1)
    truth = np.asarray(truth, dtype=np.int64).reshape(-1)
    if pred.size != truth.size:
        raise ShapeError(f"prediction has {pred.size} entries, ground truth has {truth.size}")
    return pred, truth


def clustering_accuracy(pred, truth, k: int) -> float:
    """Best one-to-one cluster-to-label matching, solved on the contingency matrix"""
    pred, truth = _check_pair(pred, truth)
    if pred.size == 0:
        return 0.0

    size = max(k, int(pred.max()) + 1, int(truth.max()) + 1)
    contingency = np.zeros((size, size), dtype=np.int64)
    np.add.at(contingency, (pred, truth), 1)

    rows, cols = linear_sum_assignment(contingency, maximize=True)
    return float(contingency[rows, cols].sum() / pred.size)


def nmi(pred, truth) -> float:
    """Mutual information over the arithmetic mean of entropies; 0 if either side is a single cluster"""
    pred, truth = _check_pair(pred, truth)
    if np.unique(pred).size < 2 or np.unique(truth).size < 2:
        return 0.0
    return float(normalized_mutual_info_score(truth, pred, average_method="arithmetic"))


def ari(pred, truth) -> float:
    pred, truth = _check_pair(pred, truth)
    return float(adjusted_rand_score(truth, pred))


def evaluate(pred, truth, k: int) -> MetricReport:
    """ACC, NMI and ARI of one prediction"""
    pred, truth = _check_pair(pred, truth)
    return MetricReport(
        acc=clustering_accuracy(pred, truth, k),
        nmi=nmi(pred, truth),
        ari=ari(pred, truth),
        n=int(pred.size),
        k=k,
    )


# ============================================================================
# SEMANTIC CONSENSUS
# ============================================================================

def semantic_consensus(h_a: np.ndarray, h_b: np.ndarray, prototypes: np.ndarray) -> bool:
    """True iff both rows pick the same nearest prototype (ties go to the lower index)"""
    prototypes = np.asarray(prototypes, dtype=np.float64)
    return int(np.argmax(prototypes @ np.asarray(h_a))) == int(np.argmax(prototypes @ np.asarray(h_b)))


def paired_consensus_rate(semantic_views, mask: np.ndarray, prototypes: PrototypeSet) -> float:
    """
    Fraction of paired observations (instance, view pair) that satisfy semantic_consensus.

    `semantic_views` are the per-view N x d semantic matrices (NaN where unobserved).
    Returns NaN when no instance is observed in two views.
    """
    c = prototypes.prototypes
    agree, total = 0, 0
    for m, n in combinations(range(len(semantic_views)), 2):
        rows = mask[:, m] & mask[:, n]
        if not rows.any():
            continue
        pick_m = np.argmax(semantic_views[m][rows] @ c.T, axis=1)
        pick_n = np.argmax(semantic_views[n][rows] @ c.T, axis=1)
        agree += int((pick_m == pick_n).sum())
        total += int(rows.sum())
    return agree / total if total else float("nan")


def consensus_rate(state: ModelState, dataset: MultiViewDataset, prototypes: PrototypeSet) -> float:
    """Share of paired observations whose semantic rows agree on the nearest consensus prototype"""
    return paired_consensus_rate(represent(state, dataset).semantic, dataset.mask, prototypes)
