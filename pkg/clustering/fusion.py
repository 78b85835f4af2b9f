# clustering/fusion.py - Completeness-weighted fusion and prototype construction
import logging
from typing import List, Sequence, Union

import numpy as np
import torch

from core.errors import ClusteringError, ContractViolationError, ShapeError
from core.models import FusionWeights, PrototypeSet

from .kmeans import kmeans

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, torch.Tensor]


def _to_numpy(x: ArrayLike) -> np.ndarray:
    if isinstance(x, torch.Tensor):
        return x.detach().cpu().double().numpy()
    return np.asarray(x, dtype=np.float64)


def completeness_weights(mask: np.ndarray) -> FusionWeights:
    """w_i^v = 1 / (views observed for i) where observed, else 0"""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ShapeError(f"mask must be N x V, got {mask.shape}")
    counts = mask.sum(axis=1)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise ContractViolationError(f"instances {empty[:10].tolist()} are observed in no view")
    return FusionWeights(weights=mask / counts[:, None].astype(np.float64))


def fuse(reps: Sequence[ArrayLike], weights: FusionWeights) -> np.ndarray:
    """Row i = sum_v w_i^v z_i^v over observed views; unobserved rows are never read"""
    w = weights.weights
    if len(reps) != w.shape[1]:
        raise ShapeError(f"got {len(reps)} views for weights over {w.shape[1]}")

    fused = None
    for v, rep in enumerate(reps):
        rep = _to_numpy(rep)
        if rep.shape[0] != w.shape[0]:
            raise ShapeError(f"view {v} has {rep.shape[0]} rows, weights have {w.shape[0]}")
        if fused is None:
            fused = np.zeros(rep.shape, dtype=np.float64)
        rows = w[:, v] > 0
        fused[rows] += w[rows, v, None] * rep[rows]
    return fused


def _unit_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    uniform = np.full_like(x, 1.0 / np.sqrt(x.shape[1]))
    return np.where(norms > 0, x / np.where(norms > 0, norms, 1.0), uniform)


def anchor_rows(mask: np.ndarray, k: int) -> np.ndarray:
    """
    Instances observed in every view, the rows prototypes are fitted on.

    Fused rows of different missing patterns average different view subsets, so
    k-means over all of them can split by pattern instead of by cluster. Falls
    back to every instance when fewer than k rows are complete.
    """
    mask = np.asarray(mask, dtype=bool)
    complete = np.flatnonzero(mask.all(axis=1))
    if complete.size < k:
        logger.debug("Only %d complete rows for k=%d, fitting prototypes on all rows", complete.size, k)
        return np.arange(mask.shape[0])
    return complete


def consensus_prototypes(consensus_reps: ArrayLike, k: int, seed: int = 0,
                         n_init: int = 10) -> PrototypeSet:
    """k-means centroids of the consensus representation, each row L2-normalized"""
    centroids, _ = kmeans(_to_numpy(consensus_reps), k, seed=seed, n_init=n_init)
    return PrototypeSet(prototypes=_unit_rows(centroids))


def per_view_prototypes(semantic_views: Sequence[ArrayLike], k: int, seed: int = 0,
                        n_init: int = 10) -> List[np.ndarray]:
    """Independent k-means on each view's observed semantic rows"""
    prototypes = []
    for v, h in enumerate(semantic_views):
        h = _to_numpy(h)
        if h.shape[0] < k:
            raise ClusteringError(f"view {v} has {h.shape[0]} observed rows, fewer than k={k}")
        centroids, _ = kmeans(h, k, seed=seed, n_init=n_init)
        prototypes.append(centroids)
    return prototypes
