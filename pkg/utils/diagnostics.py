# utils/diagnostics.py - Cosine similarity heatmaps of learned representations
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import matplotlib

matplotlib.use("Agg")
from matplotlib import pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from clustering.fusion import completeness_weights, fuse  # noqa: E402
from core.models import MultiViewDataset  # noqa: E402
from nets.model import ModelState, represent  # noqa: E402

logger = logging.getLogger(__name__)


def similarity_matrix(h: np.ndarray, order_by: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pairwise cosine similarities, rows and columns sorted by `order_by` (stable).

    Returns (matrix, order) where order maps matrix positions back to input rows.
    Zero rows are treated as the uniform unit vector.
    """
    h = np.asarray(h, dtype=np.float64)
    order = np.arange(h.shape[0]) if order_by is None else np.argsort(np.asarray(order_by), kind="stable")
    h = h[order]

    norms = np.linalg.norm(h, axis=1, keepdims=True)
    uniform = np.full_like(h, 1.0 / np.sqrt(max(h.shape[1], 1)))
    unit = np.where(norms > 0, h / np.where(norms > 0, norms, 1.0), uniform)

    sim = unit @ unit.T
    sim = np.clip((sim + sim.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(sim, 1.0)
    return sim, order


def similarity_entropy(sim: np.ndarray) -> float:
    """Mean Shannon entropy (nats) of the rows of (1 + S), each normalized to sum to 1"""
    weights = 1.0 + np.asarray(sim, dtype=np.float64)
    p = weights / weights.sum(axis=1, keepdims=True)
    logs = np.log(np.where(p > 0, p, 1.0))
    return float(-(p * logs).sum(axis=1).mean())


def write_heatmap(sim: np.ndarray, out_dir: Union[str, Path], tag: str) -> Dict[str, Path]:
    """Write sim_<tag>.csv (raw matrix) and sim_<tag>.png (grayscale, white = 1)"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"sim_{tag}.csv"
    png_path = out_dir / f"sim_{tag}.png"
    np.savetxt(csv_path, sim, fmt="%.6f", delimiter=",")
    plt.imsave(png_path, sim, cmap="gray", vmin=-1.0, vmax=1.0)
    return {'csv': csv_path, 'image': png_path}


def representation_diagnostics(state: ModelState, dataset: MultiViewDataset, out_dir: Union[str, Path],
                               tag: str = "freecsl", all_families: bool = True) -> Dict[str, float]:
    """
    Heatmaps for the consensus H and, with `all_families`, for Z, Z^v and H^v.

    Returns the similarity entropy of every written matrix, keyed by family name.
    """
    reps = represent(state, dataset)
    weights = completeness_weights(dataset.mask)
    labels = dataset.labels

    families = {'H': (fuse(reps.semantic, weights), labels)}
    if all_families:
        families['Z'] = (fuse(reps.latent, weights), labels)
        for v in range(dataset.n_views):
            rows = dataset.mask[:, v]
            view_labels = labels[rows] if labels is not None else None
            families[f'Z{v}'] = (reps.latent[v][rows], view_labels)
            families[f'H{v}'] = (reps.semantic[v][rows], view_labels)

    entropies = {}
    for family, (matrix, order_by) in families.items():
        sim, _ = similarity_matrix(matrix, order_by)
        write_heatmap(sim, out_dir, f"{tag}_{family}")
        entropies[family] = similarity_entropy(sim)
        logger.debug("Similarity entropy %s: %.4f", family, entropies[family])
    return entropies
