# clustering/consensus.py - Prototype soft assignments, transport pseudo-labels, swapped distillation
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Tuple

import numpy as np
import torch

from core.errors import ConfigError, NonFiniteError, ShapeError
from core.hyperparams import CslConfig
from core.models import AssignmentBundle, MultiViewDataset, PrototypeSet
from nets.model import ModelState, contrastive_head, encode

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-12

PairTargets = Dict[Tuple[int, int], AssignmentBundle]


def safe_log(x: torch.Tensor) -> torch.Tensor:
    return torch.log(x.clamp_min(LOG_FLOOR))


# ============================================================================
# ASSIGNMENTS
# ============================================================================

def soft_assign(h: torch.Tensor, prototypes: torch.Tensor, temperature: float) -> torch.Tensor:
    """p_ik = softmax_k(h_i . c_k / tau)"""
    if temperature <= 0:
        raise ConfigError(f"temperature must be positive, got {temperature}")
    prototypes = prototypes.to(h.dtype)
    # torch.softmax subtracts the row max before exponentiating
    return torch.softmax(h @ prototypes.T / temperature, dim=1)


@torch.no_grad()
def sinkhorn_plan(h: torch.Tensor, prototypes: torch.Tensor, alpha: float, iters: int) -> torch.Tensor:
    """
    Entropic transport plan over the polytope with row sums 1/B and column sums 1/K.

    Each round rescales columns to 1/K, then rows to 1/B, so the returned rows
    sum to 1/B exactly and the columns approach 1/K as `iters` grows.
    """
    if alpha <= 0:
        raise ConfigError(f"alpha must be positive, got {alpha}")
    if iters < 1:
        raise ConfigError(f"sinkhorn needs at least one iteration, got {iters}")

    scores = h.detach() @ prototypes.to(h.dtype).T
    if not torch.isfinite(scores).all():
        raise NonFiniteError("sinkhorn received non-finite scores")
    b, k = scores.shape
    if b == 0:
        return scores.new_zeros((0, k))

    logits = scores / alpha
    q = torch.exp(logits - logits.max())
    q /= q.sum()
    tiny = torch.finfo(q.dtype).tiny
    for _ in range(iters):
        q /= q.sum(dim=0, keepdim=True).clamp_min(tiny)
        q /= k
        q /= q.sum(dim=1, keepdim=True).clamp_min(tiny)
        q /= b
    return q


@torch.no_grad()
def sinkhorn_labels(h: torch.Tensor, prototypes: torch.Tensor, alpha: float, iters: int) -> torch.Tensor:
    """Pseudo-labels Q (B x K, rows sum to 1), gradient-blocked"""
    q = sinkhorn_plan(h, prototypes, alpha, iters)
    if q.shape[0] == 0:
        return q
    return q / q.sum(dim=1, keepdim=True)


def transport_objective(q: np.ndarray, scores: np.ndarray, alpha: float) -> float:
    """sum_ik q_ik s_ik - alpha * sum_ik q_ik log q_ik for a plan q"""
    q = np.asarray(q, dtype=np.float64)
    entropy = -np.sum(np.where(q > 0, q * np.log(np.where(q > 0, q, 1.0)), 0.0))
    return float(np.sum(q * scores) + alpha * entropy)


# ============================================================================
# SWAPPED DISTILLATION
# ============================================================================

@dataclass
class PairLoss:
    """Swapped distillation value for one view pair; is_empty flags N_mn = 0"""
    value: torch.Tensor
    is_empty: bool = False


def distillation_term(p: torch.Tensor, q: torch.Tensor) -> torch.Tensor:
    """-(1/N) sum_i sum_k q_ik log p_ik"""
    return -(q * safe_log(p)).sum() / p.shape[0]


def swapped_kd_pair(p_m: torch.Tensor, q_n: torch.Tensor, p_n: torch.Tensor, q_m: torch.Tensor) -> PairLoss:
    """View m learns from view n's pseudo-labels and vice versa"""
    shapes = {tuple(t.shape) for t in (p_m, q_n, p_n, q_m)}
    if len(shapes) != 1:
        raise ShapeError(f"swapped distillation needs equal shapes, got {sorted(shapes)}")
    if p_m.shape[0] == 0:
        logger.debug("Empty view pairing, swapped distillation contributes 0")
        return PairLoss(value=p_m.new_zeros(()), is_empty=True)
    return PairLoss(value=distillation_term(p_m, q_n) + distillation_term(p_n, q_m))


def _batch_semantics(state: ModelState, dataset: MultiViewDataset,
                     batch: np.ndarray) -> List[Tuple[np.ndarray, torch.Tensor]]:
    """(instance ids, H rows) for the observed batch rows of every view"""
    out = []
    for v in range(dataset.n_views):
        rows = batch[dataset.mask[batch, v]]
        h = contrastive_head(encode(dataset.views[v][rows], v, state), state)
        out.append((rows, h))
    return out


def _pair_rows(rows_m: np.ndarray, rows_n: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shared instance ids and their positions inside each view's batch rows"""
    shared, pos_m, pos_n = np.intersect1d(rows_m, rows_n, assume_unique=True, return_indices=True)
    return shared, pos_m, pos_n


def solve_pair_targets(state: ModelState, dataset: MultiViewDataset, prototypes: PrototypeSet,
                       batch: np.ndarray, config: CslConfig) -> PairTargets:
    """
    Transport pseudo-labels for every ordered view pair of a batch.

    targets[(m, n)] holds Q computed from view n's semantic rows on the instances
    paired between m and n; it supervises view m.
    """
    batch = np.sort(np.asarray(batch, dtype=np.int64))
    c = prototypes.as_tensor(state.dtype)
    targets: PairTargets = {}
    with torch.no_grad():
        semantics = _batch_semantics(state, dataset, batch)
        for m, n in combinations(range(dataset.n_views), 2):
            (rows_m, h_m), (rows_n, h_n) = semantics[m], semantics[n]
            shared, pos_m, pos_n = _pair_rows(rows_m, rows_n)
            targets[(m, n)] = AssignmentBundle(
                row_index=shared,
                pseudo=sinkhorn_labels(h_n[pos_n], c, config.alpha, config.sinkhorn_iters),
            )
            targets[(n, m)] = AssignmentBundle(
                row_index=shared,
                pseudo=sinkhorn_labels(h_m[pos_m], c, config.alpha, config.sinkhorn_iters),
            )
    return targets


def total_cc_loss(state: ModelState, dataset: MultiViewDataset, prototypes: PrototypeSet,
                  batch: np.ndarray, config: CslConfig,
                  targets: Optional[PairTargets] = None) -> torch.Tensor:
    """
    Consensus loss of a batch: swapped distillation summed over ordered view pairs.

    The swapped term of (m, n) equals that of (n, m), so each unordered pair is
    computed once and counted twice. Pass `targets` from solve_pair_targets to
    hold the pseudo-labels fixed.
    """
    batch = np.sort(np.asarray(batch, dtype=np.int64))
    c = prototypes.as_tensor(state.dtype)
    total = torch.zeros((), dtype=state.dtype)
    if dataset.n_views < 2:
        return total

    semantics = _batch_semantics(state, dataset, batch)
    for m, n in combinations(range(dataset.n_views), 2):
        (rows_m, h_m), (rows_n, h_n) = semantics[m], semantics[n]
        shared, pos_m, pos_n = _pair_rows(rows_m, rows_n)
        h_m, h_n = h_m[pos_m], h_n[pos_n]

        if targets is not None:
            q_n, q_m = targets[(m, n)].pseudo, targets[(n, m)].pseudo
            if not np.array_equal(targets[(m, n)].row_index, shared):
                raise ShapeError(f"precomputed targets for views ({m}, {n}) cover different instances")
        else:
            q_n = sinkhorn_labels(h_n, c, config.alpha, config.sinkhorn_iters)
            q_m = sinkhorn_labels(h_m, c, config.alpha, config.sinkhorn_iters)

        pair = swapped_kd_pair(
            soft_assign(h_m, c, config.temperature), q_n.to(state.dtype),
            soft_assign(h_n, c, config.temperature), q_m.to(state.dtype),
        )
        total = total + 2 * pair.value
    return total
