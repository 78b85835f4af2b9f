# clustering/kmeans.py - Seeded Lloyd k-means
import logging
import warnings
from typing import Tuple

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from core.errors import ClusteringError, NonFiniteError, ShapeError

logger = logging.getLogger(__name__)


def kmeans(points: np.ndarray, k: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-4,
           n_init: int = 10) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lloyd iterations from k-means++ seeding, best of `n_init` restarts.

    Empty clusters are relocated to the points farthest from their centroids.
    tol is relative to the mean per-feature variance of `points`.

    Returns:
        (centroids K x d, assignment of length M)
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ShapeError(f"k-means expects an M x d matrix, got shape {points.shape}")
    if k < 1:
        raise ClusteringError(f"k must be positive, got {k}")
    if points.shape[0] < k:
        raise ClusteringError(f"k-means needs at least k={k} points, got {points.shape[0]}")
    if not np.isfinite(points).all():
        raise NonFiniteError("k-means input contains non-finite values")

    model = KMeans(
        n_clusters=k,
        init="k-means++",
        n_init=n_init,
        max_iter=max_iter,
        tol=tol,
        random_state=seed,
        algorithm="lloyd",
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        model.fit(points)
    for warning in caught:
        logger.debug("k-means: %s", warning.message)

    return model.cluster_centers_, model.labels_.astype(np.int64)


def inertia(points: np.ndarray, centroids: np.ndarray, assignment: np.ndarray) -> float:
    """Sum of squared distances of points to their assigned centroid"""
    points = np.asarray(points, dtype=np.float64)
    return float(((points - centroids[assignment]) ** 2).sum())
