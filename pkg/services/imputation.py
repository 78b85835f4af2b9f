# services/imputation.py - Cross-view KNN imputation baselines (ILR / ISR)
import logging
from typing import List, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from clustering.kmeans import kmeans
from core.errors import ConfigError
from core.models import MultiViewDataset, PredictionMode
from nets.model import ModelState, represent

logger = logging.getLogger(__name__)


def impute_rows(views: Sequence[np.ndarray], mask: np.ndarray, neighbors: int) -> List[np.ndarray]:
    """
    Fill every missing row of every view from neighbors found in the other views.

    For an instance i missing in view v, each view u where i is observed
    contributes the `neighbors` nearest rows of i in u (Euclidean, ties toward the
    lower index) among instances observed in both u and v. The filled row is the
    mean of those instances' rows in v; with no candidates it falls back to the
    mean of v's observed rows.
    """
    if neighbors < 1:
        raise ConfigError(f"neighbors must be at least 1, got {neighbors}")
    n_views = len(views)
    filled = [np.array(x, dtype=np.float64, copy=True) for x in views]

    for v in range(n_views):
        missing = np.flatnonzero(~mask[:, v])
        if missing.size == 0:
            continue
        sums = np.zeros((missing.size, filled[v].shape[1]))
        counts = np.zeros(missing.size)

        for u in range(n_views):
            if u == v:
                continue
            queries = mask[missing, u]
            candidates = np.flatnonzero(mask[:, u] & mask[:, v])
            if not queries.any() or candidates.size == 0:
                continue
            dist = cdist(views[u][missing[queries]], views[u][candidates], metric="sqeuclidean")
            nearest = candidates[np.argsort(dist, axis=1, kind="stable")[:, :neighbors]]
            sums[queries] += views[v][nearest].sum(axis=1)
            counts[queries] += nearest.shape[1]

        fallback = views[v][mask[:, v]].mean(axis=0)
        has = counts > 0
        filled[v][missing[has]] = sums[has] / counts[has, None]
        filled[v][missing[~has]] = fallback
        if (~has).any():
            logger.debug("View %d: %d rows imputed from the view mean", v, int((~has).sum()))
    return filled


def impute_baseline(state: ModelState, dataset: MultiViewDataset, mode: PredictionMode,
                    neighbors: int = 3, seed: int = 0, n_init: int = 10) -> np.ndarray:
    """
    Imputation baselines: fill missing latent (ILR) or semantic (ISR) rows by
    cross-view neighbor transfer, sum the completed view matrices and run k-means.
    """
    mode = PredictionMode(mode)
    if mode is PredictionMode.FREECSL:
        raise ConfigError("impute_baseline runs only the ilr and isr modes")

    reps = represent(state, dataset)
    family = reps.latent if mode is PredictionMode.ILR else reps.semantic
    completed = impute_rows(family, dataset.mask, neighbors)

    _, labels = kmeans(np.sum(completed, axis=0), dataset.n_clusters, seed=seed, n_init=n_init)
    return labels
