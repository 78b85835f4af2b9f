# core/dataset.py - Loading, masking and normalizing multi-view datasets
"""
Dataset directory layout::

    meta            key=value lines: n, v, k, dims (comma-separated, one per view)
    view_<i>.csv    N rows of D_i comma-separated decimals, i = 0..V-1
    mask.csv        optional, N rows of V 0/1 entries (generated when absent)
    labels.csv      optional, N integers in [0, k)

Rows of a view that the mask marks missing may hold any value; the mask is
authoritative and those rows are replaced by the sentinel on load.
"""
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from dotenv import dotenv_values

from .errors import (
    ConfigError,
    ContractViolationError,
    DatasetFormatError,
    DatasetLoadError,
    UnsatisfiableMaskError,
    ViewIndexError,
)
from .models import MaskSpec, MultiViewDataset

logger = logging.getLogger(__name__)

META_FILE = "meta"
MASK_FILE = "mask.csv"
LABELS_FILE = "labels.csv"


def view_file(view: int) -> str:
    return f"view_{view}.csv"


# ============================================================================
# LOADING AND SAVING
# ============================================================================

def _read_meta(root: Path) -> dict:
    path = root / META_FILE
    if not path.is_file():
        raise DatasetLoadError(f"missing meta file: {path}")

    raw = dotenv_values(path)
    try:
        meta = {
            'n': int(raw['n']),
            'v': int(raw['v']),
            'k': int(raw['k']),
            'dims': [int(d) for d in str(raw['dims']).split(',') if d.strip()],
        }
    except KeyError as e:
        raise DatasetFormatError(f"meta file {path} lacks key {e}") from e
    except (TypeError, ValueError) as e:
        raise DatasetFormatError(f"meta file {path} has a non-integer value: {e}") from e

    if len(meta['dims']) != meta['v']:
        raise DatasetFormatError(f"meta declares v={meta['v']} but {len(meta['dims'])} dims")
    return meta


def _read_matrix(path: Path, dtype=np.float64) -> np.ndarray:
    if not path.is_file():
        raise DatasetLoadError(f"missing file: {path}")
    try:
        return np.loadtxt(path, delimiter=",", dtype=dtype, ndmin=2)
    except ValueError as e:
        raise DatasetFormatError(f"malformed file {path}: {e}") from e


def read_mask(path: Union[str, Path]) -> np.ndarray:
    """Read a 0/1 mask file into a boolean matrix"""
    values = _read_matrix(Path(path), dtype=np.int64)
    if not np.isin(values, (0, 1)).all():
        raise DatasetFormatError(f"mask file {path} must contain only 0/1 entries")
    return values.astype(bool)


def write_mask(mask: np.ndarray, path: Union[str, Path]) -> Path:
    """Write a boolean mask as N rows of V 0/1 entries"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.asarray(mask, dtype=np.int64), fmt="%d", delimiter=",")
    return path


def load_dataset(root_path: Union[str, Path], mask: Optional[np.ndarray] = None,
                 mask_spec: Optional[MaskSpec] = None) -> MultiViewDataset:
    """
    Load a dataset directory.

    Args:
        root_path: directory in the documented layout
        mask: explicit mask overriding mask.csv
        mask_spec: used to generate a mask when neither `mask` nor mask.csv exist
            (defaults to a fully observed mask)

    Returns:
        MultiViewDataset with sentinel rows where the mask is false
    """
    root = Path(root_path)
    if not root.is_dir():
        raise DatasetLoadError(f"dataset directory not found: {root}")

    meta = _read_meta(root)
    n, v = meta['n'], meta['v']

    views = []
    for i in range(v):
        x = _read_matrix(root / view_file(i))
        if x.shape != (n, meta['dims'][i]):
            raise DatasetFormatError(
                f"{view_file(i)} has shape {x.shape}, meta declares ({n}, {meta['dims'][i]})"
            )
        views.append(x)

    if mask is None:
        if (root / MASK_FILE).is_file():
            mask = read_mask(root / MASK_FILE)
        else:
            mask = generate_mask(n, v, mask_spec or MaskSpec(missing_rate=0.0))
    if mask.shape != (n, v):
        raise DatasetFormatError(f"mask has shape {mask.shape}, expected ({n}, {v})")

    labels = None
    if (root / LABELS_FILE).is_file():
        labels = _read_matrix(root / LABELS_FILE, dtype=np.int64).reshape(-1)
        if labels.shape[0] != n:
            raise DatasetFormatError(f"{LABELS_FILE} has {labels.shape[0]} entries, expected {n}")

    dataset = MultiViewDataset(views=views, mask=mask, n_clusters=meta['k'],
                               labels=labels, name=root.name)
    logger.info("Loaded dataset %s", dataset.to_dict())
    return dataset


def save_dataset(dataset: MultiViewDataset, root_path: Union[str, Path],
                 include_mask: bool = True) -> Path:
    """Write a dataset in the documented directory layout; missing rows are written as 0"""
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)

    dims = ",".join(str(d) for d in dataset.dims)
    (root / META_FILE).write_text(
        f"n={dataset.n_instances}\nv={dataset.n_views}\nk={dataset.n_clusters}\ndims={dims}\n"
    )
    for i, x in enumerate(dataset.views):
        np.savetxt(root / view_file(i), np.nan_to_num(x, nan=0.0), fmt="%.10g", delimiter=",")
    if include_mask:
        write_mask(dataset.mask, root / MASK_FILE)
    if dataset.labels is not None:
        np.savetxt(root / LABELS_FILE, dataset.labels, fmt="%d")
    return root


# ============================================================================
# MASKING
# ============================================================================

def generate_mask(n: int, v: int, spec: MaskSpec) -> np.ndarray:
    """
    Instance-incomplete missing protocol.

    round(r*n) instances, chosen by a seeded shuffle, become incomplete; each one
    keeps a uniformly random nonempty strict subset of its views.
    """
    if n < 1 or v < 1:
        raise ContractViolationError(f"need n >= 1 and v >= 1, got n={n}, v={v}")
    r = spec.missing_rate
    if v == 1 and r > 0:
        raise UnsatisfiableMaskError(
            f"missing rate {r} needs at least 2 views; with v=1 every instance must stay observed"
        )

    mask = np.ones((n, v), dtype=bool)
    n_incomplete = int(np.floor(r * n + 0.5))
    if n_incomplete == 0:
        return mask

    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(n)
    for i in np.sort(order[:n_incomplete]):
        # rejection sampling gives every nonempty strict subset equal probability
        while True:
            keep = rng.random(v) < 0.5
            if 0 < keep.sum() < v:
                break
        mask[i] = keep
    return mask


def _check_view(mask: np.ndarray, view: int):
    if not 0 <= view < mask.shape[1]:
        raise ViewIndexError(f"view id {view} outside [0, {mask.shape[1]})")


def paired_indices(mask: np.ndarray, m: int, n: int) -> np.ndarray:
    """Sorted indices of instances observed in both view m and view n"""
    _check_view(mask, m)
    _check_view(mask, n)
    if m == n:
        raise ContractViolationError("paired_indices needs two different views")
    return np.flatnonzero(mask[:, m] & mask[:, n])


def observed_rows(mask: np.ndarray, view: int) -> np.ndarray:
    """Sorted indices of instances observed in one view"""
    _check_view(mask, view)
    return np.flatnonzero(mask[:, view])


# ============================================================================
# PREPROCESSING
# ============================================================================

def normalize(dataset: MultiViewDataset) -> MultiViewDataset:
    """Per-feature min-max scaling to [0, 1] over observed rows; constant columns map to 0"""
    views = []
    for v, x in enumerate(dataset.views):
        rows = dataset.mask[:, v]
        scaled = np.array(x, copy=True)
        if rows.any():
            observed = x[rows]
            low = observed.min(axis=0)
            span = observed.max(axis=0) - low
            safe = np.where(span > 0, span, 1.0)
            scaled[rows] = np.where(span > 0, (observed - low) / safe, 0.0)
        views.append(scaled)

    return MultiViewDataset(views=views, mask=dataset.mask, n_clusters=dataset.n_clusters,
                            labels=dataset.labels, name=dataset.name)


def make_synthetic_dataset(n: int = 600, n_clusters: int = 3, dims: Sequence[int] = (10, 10),
                           separation: float = 6.0, seed: int = 0,
                           name: str = "synthetic") -> MultiViewDataset:
    """
    Gaussian blobs with unit within-cluster deviation, one blob per cluster and view.

    Cluster means sit on scaled orthonormal directions so every pair of means is
    exactly `separation` standard deviations apart in every view.
    """
    if any(d < n_clusters for d in dims):
        raise ConfigError(f"every view needs at least {n_clusters} dims for orthogonal cluster means")

    rng = np.random.default_rng(seed)
    labels = np.arange(n) % n_clusters
    rng.shuffle(labels)

    views: List[np.ndarray] = []
    for d in dims:
        basis, _ = np.linalg.qr(rng.normal(size=(d, d)))
        means = basis[:n_clusters] * (separation / np.sqrt(2.0))
        views.append(means[labels] + rng.normal(size=(n, d)))

    return MultiViewDataset(views=views, mask=np.ones((n, len(dims)), dtype=bool),
                            n_clusters=n_clusters, labels=labels, name=name)
