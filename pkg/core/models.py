# core/models.py - Domain types for incomplete multi-view clustering
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
import torch

from .errors import (
    ContractViolationError,
    DataValidationError,
    NonFiniteError,
    ShapeError,
)

# Rows of a view that are not observed hold this value; every operation reads
# views through the mask, so a leak shows up as NaN in the result.
SENTINEL = np.nan


class MaskProtocol(Enum):
    """How a missing rate is turned into a mask"""
    INSTANCE_INCOMPLETE = "instance-incomplete"


class PredictionMode(Enum):
    """How cluster labels are produced from a trained state"""
    FREECSL = "freecsl"
    ILR = "ilr"  # impute latent representations, then k-means on the view sum
    ISR = "isr"  # impute semantic representations, then k-means on the view sum


class TrainingStage(Enum):
    WARMUP = "warmup"
    FINETUNE = "finetune"


@dataclass
class MaskSpec:
    """Missing-rate request for generate_mask"""
    missing_rate: float
    seed: int = 0
    protocol: MaskProtocol = MaskProtocol.INSTANCE_INCOMPLETE

    def __post_init__(self):
        if not 0.0 <= self.missing_rate < 1.0:
            raise DataValidationError(f"missing_rate must lie in [0, 1), got {self.missing_rate}")
        if isinstance(self.protocol, str):
            self.protocol = MaskProtocol(self.protocol)


@dataclass
class MultiViewDataset:
    """Per-view feature matrices, observation mask and optional ground truth.

    Views are stored as float64 arrays with SENTINEL in every unobserved row.
    All arrays are read-only after construction.
    """
    views: List[np.ndarray]
    mask: np.ndarray
    n_clusters: int
    labels: Optional[np.ndarray] = None
    name: str = "dataset"

    def __post_init__(self):
        if not self.views:
            raise ShapeError("a dataset needs at least one view")

        mask = np.asarray(self.mask, dtype=bool)
        n = mask.shape[0]
        if mask.ndim != 2 or mask.shape[1] != len(self.views):
            raise ShapeError(f"mask must be N x V with V={len(self.views)}, got {mask.shape}")

        views = []
        for v, x in enumerate(self.views):
            x = np.array(x, dtype=np.float64, copy=True)
            if x.ndim != 2 or x.shape[0] != n:
                raise ShapeError(f"view {v} has shape {x.shape}, expected {n} rows")
            x[~mask[:, v]] = SENTINEL
            x.setflags(write=False)
            views.append(x)

        empty = np.flatnonzero(~mask.any(axis=1))
        if empty.size:
            raise DataValidationError(f"instances {empty[:10].tolist()} are observed in no view")

        if self.n_clusters < 1:
            raise DataValidationError(f"n_clusters must be positive, got {self.n_clusters}")

        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64).copy()
            if labels.shape != (n,):
                raise ShapeError(f"labels must have length {n}, got {labels.shape}")
            bad = (labels < 0) | (labels >= self.n_clusters)
            if bad.any():
                raise DataValidationError(
                    f"labels must lie in [0, {self.n_clusters}); found {labels[bad][:5].tolist()}"
                )
            labels.setflags(write=False)
            self.labels = labels

        mask = mask.copy()
        mask.setflags(write=False)
        self.views = views
        self.mask = mask

    @property
    def n_instances(self) -> int:
        return self.mask.shape[0]

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def dims(self) -> List[int]:
        return [x.shape[1] for x in self.views]

    def observed(self, view: int) -> np.ndarray:
        """Observed rows of one view, in instance order"""
        return self.views[view][self.mask[:, view]]

    def with_mask(self, mask: np.ndarray) -> "MultiViewDataset":
        """Same data under a stricter mask (only already-observed entries may stay observed)"""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.mask.shape:
            raise ShapeError(f"mask shape {mask.shape} does not match dataset mask {self.mask.shape}")
        if (mask & ~self.mask).any():
            raise ContractViolationError("new mask marks entries observed that are missing in the data")
        return MultiViewDataset(
            views=list(self.views), mask=mask, n_clusters=self.n_clusters,
            labels=self.labels, name=self.name,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Summary for logs and result rows"""
        return {
            'name': self.name,
            'n': self.n_instances,
            'v': self.n_views,
            'k': self.n_clusters,
            'dims': self.dims,
            'observed_per_view': self.mask.sum(axis=0).tolist(),
            'complete_instances': int(self.mask.all(axis=1).sum()),
            'has_labels': self.labels is not None,
        }


@dataclass
class FusionWeights:
    """Completeness weights w_i^v: 1/(observed views of i) where observed, else 0"""
    weights: np.ndarray

    def __post_init__(self):
        if self.weights.ndim != 2:
            raise ShapeError(f"fusion weights must be N x V, got {self.weights.shape}")
        if not np.allclose(self.weights.sum(axis=1), 1.0, rtol=0.0, atol=1e-12):
            raise ContractViolationError("every row of the fusion weights must sum to 1")


@dataclass
class PrototypeSet:
    """Consensus prototypes (K x d, unit rows) and optional per-view prototypes"""
    prototypes: np.ndarray
    per_view: Optional[List[np.ndarray]] = None

    def __post_init__(self):
        if not np.isfinite(self.prototypes).all():
            raise NonFiniteError("prototypes contain non-finite entries")
        norms = np.linalg.norm(self.prototypes, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-6):
            raise ContractViolationError("consensus prototypes must have unit L2 norm")

    @property
    def n_clusters(self) -> int:
        return self.prototypes.shape[0]

    def as_tensor(self, dtype: torch.dtype = torch.float32) -> torch.Tensor:
        return torch.as_tensor(self.prototypes, dtype=dtype)


@dataclass
class AssignmentBundle:
    """Soft assignments P, transport pseudo-labels Q and t-distribution labels L for a set of rows"""
    row_index: np.ndarray
    pseudo: torch.Tensor
    soft: Optional[torch.Tensor] = None
    self_labels: Optional[torch.Tensor] = None

    def __post_init__(self):
        for name in ("pseudo", "soft", "self_labels"):
            value = getattr(self, name)
            if value is None or value.numel() == 0:
                continue
            if value.shape[0] != len(self.row_index):
                raise ShapeError(f"{name} has {value.shape[0]} rows for {len(self.row_index)} instances")
            sums = value.detach().sum(dim=1)
            if not torch.allclose(sums, torch.ones_like(sums), atol=1e-6):
                raise ContractViolationError(f"rows of {name} must sum to 1")


@dataclass
class ViewGraph:
    """Symmetric 0/1 KNN graph over one view's observed rows"""
    adjacency: np.ndarray
    nodes: np.ndarray
    degrees: np.ndarray = field(init=False)
    edge_count: float = field(init=False)

    def __post_init__(self):
        a = self.adjacency
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeError(f"adjacency must be square, got {a.shape}")
        if a.shape[0] != len(self.nodes):
            raise ShapeError(f"adjacency has {a.shape[0]} nodes, node index has {len(self.nodes)}")
        self.degrees = a.sum(axis=1).astype(np.float64)
        self.edge_count = float(self.degrees.sum() / 2.0)

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]


@dataclass
class EpochReport:
    """Loss components of one training epoch"""
    stage: str
    epoch: int
    rec: float
    cc: float = 0.0
    gc: float = 0.0
    total: float = 0.0
    wall_time: float = 0.0
    metrics: Optional[Dict[str, float]] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for the line-delimited epoch log"""
        return {
            'stage': self.stage,
            'epoch': self.epoch,
            'rec': self.rec,
            'cc': self.cc,
            'gc': self.gc,
            'total': self.total,
            'wall_time': round(self.wall_time, 6),
            'metrics': self.metrics,
        }

    def is_consistent(self, use_cc: bool, use_gc: bool, tol: float = 1e-9) -> bool:
        """total == rec + cc*[use_cc] + gc*[use_gc]"""
        expected = self.rec + (self.cc if use_cc else 0.0) + (self.gc if use_gc else 0.0)
        return abs(self.total - expected) <= tol * max(1.0, abs(expected))


@dataclass
class MetricReport:
    """Hungarian ACC, NMI and ARI of one prediction"""
    acc: float
    nmi: float
    ari: float
    n: int
    k: int

    def to_dict(self) -> Dict[str, Any]:
        return {'acc': self.acc, 'nmi': self.nmi, 'ari': self.ari, 'n': self.n, 'k': self.k}

    def get_formatted_summary(self) -> str:
        return f"ACC {self.acc * 100:.2f}  NMI {self.nmi * 100:.2f}  ARI {self.ari * 100:.2f}"
