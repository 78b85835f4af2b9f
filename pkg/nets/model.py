# nets/model.py - Per-view autoencoders, shared heads and per-view GCNs
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import torch
from torch import nn

from core.errors import NonFiniteError, ShapeError, ViewIndexError
from core.hyperparams import ArchitectureConfig
from core.models import MultiViewDataset

from .layers import Activation, GraphConvolution, LayerSpec, mlp, normalized_adjacency

DTYPES = {"float32": torch.float32, "float64": torch.float64}


@dataclass
class ModelSpec:
    """Every width needed to build a ModelState"""
    view_dims: List[int]
    n_clusters: int
    hidden_dims: List[int] = field(default_factory=lambda: [500, 500, 2000])
    latent_dim: int = 64
    gcn_dims: List[int] = field(default_factory=lambda: [128, 64])
    dtype: str = "float32"

    @classmethod
    def from_config(cls, view_dims: Sequence[int], n_clusters: int,
                    architecture: Optional[ArchitectureConfig] = None) -> "ModelSpec":
        architecture = architecture or ArchitectureConfig()
        return cls(
            view_dims=list(view_dims),
            n_clusters=n_clusters,
            hidden_dims=list(architecture.hidden_dims),
            latent_dim=architecture.latent_dim,
            gcn_dims=list(architecture.gcn_dims),
            dtype=architecture.dtype,
        )

    @property
    def n_views(self) -> int:
        return len(self.view_dims)

    @property
    def torch_dtype(self) -> torch.dtype:
        return DTYPES[self.dtype]

    @staticmethod
    def _chain(widths: List[int], last: Activation, hidden: Activation = Activation.RELU) -> List[LayerSpec]:
        n = len(widths) - 1
        return [LayerSpec(widths[i], widths[i + 1], hidden if i < n - 1 else last) for i in range(n)]

    def encoder_layers(self, view: int) -> List[LayerSpec]:
        return self._chain([self.view_dims[view], *self.hidden_dims, self.latent_dim], Activation.NONE)

    def decoder_layers(self, view: int) -> List[LayerSpec]:
        return self._chain([self.latent_dim, *reversed(self.hidden_dims), self.view_dims[view]], Activation.NONE)

    def gcn_layers(self) -> List[LayerSpec]:
        # relu on the hidden aggregation, identity before the classifier
        return self._chain([self.latent_dim, *self.gcn_dims], Activation.NONE)

    def head_layer(self) -> LayerSpec:
        return LayerSpec(self.latent_dim, self.latent_dim, Activation.NONE)

    def classifier_layer(self) -> LayerSpec:
        return LayerSpec(self.gcn_dims[-1], self.n_clusters, Activation.SOFTMAX)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'view_dims': self.view_dims,
            'n_clusters': self.n_clusters,
            'hidden_dims': self.hidden_dims,
            'latent_dim': self.latent_dim,
            'gcn_dims': self.gcn_dims,
            'dtype': self.dtype,
        }


class ModelState(nn.Module):
    """
    All trainable parameters.

    Per view: encoder E_v, decoder D_v and a two-layer GCN G_v (W and W_s per layer).
    Shared: the contrastive head (one affine layer) and the GCN classifier.
    """

    def __init__(self, spec: ModelSpec):
        super().__init__()
        self.spec = spec
        self.encoders = nn.ModuleList([mlp(spec.encoder_layers(v)) for v in range(spec.n_views)])
        self.decoders = nn.ModuleList([mlp(spec.decoder_layers(v)) for v in range(spec.n_views)])
        self.gcns = nn.ModuleList([
            nn.ModuleList([GraphConvolution(layer) for layer in spec.gcn_layers()])
            for _ in range(spec.n_views)
        ])
        head = spec.head_layer()
        self.head = nn.Linear(head.in_dim, head.out_dim)
        classifier = spec.classifier_layer()
        self.classifier = nn.Linear(classifier.in_dim, classifier.out_dim)

    @property
    def n_views(self) -> int:
        return self.spec.n_views

    @property
    def dtype(self) -> torch.dtype:
        return self.spec.torch_dtype

    def check_view(self, view: int):
        if not 0 <= view < self.n_views:
            raise ViewIndexError(f"view id {view} outside [0, {self.n_views})")

    @staticmethod
    def check_finite(module: nn.Module, name: str):
        for param_name, param in module.named_parameters():
            if not torch.isfinite(param).all():
                raise NonFiniteError(f"non-finite parameter {name}.{param_name}")


# ============================================================================
# INITIALIZATION
# ============================================================================

def init_params(spec: ModelSpec, seed: int = 0) -> ModelState:
    """
    Build a ModelState with seeded variance-scaled uniform weights and zero biases.

    Each weight of fan-in f is drawn from U(-sqrt(6/f), sqrt(6/f)), the He-uniform
    bound for relu layers. Bit-identical for identical (spec, seed).
    """
    state = ModelState(spec)
    generator = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for module in state.modules():
            if isinstance(module, nn.Linear):
                bound = float(np.sqrt(6.0 / module.in_features))
                module.weight.uniform_(-bound, bound, generator=generator)
                if module.bias is not None:
                    module.bias.zero_()
    return state.to(spec.torch_dtype)


# ============================================================================
# FORWARD OPERATIONS
# ============================================================================

def as_input(x: Union[np.ndarray, torch.Tensor], state: ModelState) -> torch.Tensor:
    return torch.as_tensor(x, dtype=state.dtype)


def encode(x: Union[np.ndarray, torch.Tensor], view: int, state: ModelState) -> torch.Tensor:
    """Latent representation Z of observed rows of one view"""
    state.check_view(view)
    x = as_input(x, state)
    expected = state.spec.view_dims[view]
    if x.ndim != 2 or x.shape[1] != expected:
        raise ShapeError(f"view {view} encoder expects width {expected}, got {tuple(x.shape)}")
    state.check_finite(state.encoders[view], f"encoders.{view}")
    return state.encoders[view](x)


def decode(z: Union[np.ndarray, torch.Tensor], view: int, state: ModelState) -> torch.Tensor:
    """Reconstruction of one view from latent rows"""
    state.check_view(view)
    z = as_input(z, state)
    if z.ndim != 2 or z.shape[1] != state.spec.latent_dim:
        raise ShapeError(f"decoder expects width {state.spec.latent_dim}, got {tuple(z.shape)}")
    state.check_finite(state.decoders[view], f"decoders.{view}")
    return state.decoders[view](z)


def contrastive_head(z: Union[np.ndarray, torch.Tensor], state: ModelState) -> torch.Tensor:
    """
    Unit-norm semantic representation H.

    A row that is exactly zero before normalization becomes the uniform unit
    vector 1/sqrt(d) in every entry.
    """
    z = as_input(z, state)
    if z.ndim != 2 or z.shape[1] != state.spec.latent_dim:
        raise ShapeError(f"contrastive head expects width {state.spec.latent_dim}, got {tuple(z.shape)}")
    state.check_finite(state.head, "head")

    out = state.head(z)
    norms = out.norm(dim=1, keepdim=True)
    uniform = torch.full_like(out, 1.0 / float(np.sqrt(out.shape[1])))
    return torch.where(norms > 0, out / norms.clamp_min(torch.finfo(out.dtype).tiny), uniform)


def gcn_forward(z: Union[np.ndarray, torch.Tensor], adjacency: Union[np.ndarray, torch.Tensor],
                view: int, state: ModelState) -> torch.Tensor:
    """Two graph-convolution layers over one view's observed rows"""
    state.check_view(view)
    z = as_input(z, state)
    if z.ndim != 2 or z.shape[1] != state.spec.latent_dim:
        raise ShapeError(f"GCN expects width {state.spec.latent_dim}, got {tuple(z.shape)}")
    norm_adj = normalized_adjacency(adjacency, dtype=state.dtype)
    if norm_adj.shape[0] != z.shape[0]:
        raise ShapeError(f"adjacency has {norm_adj.shape[0]} nodes for {z.shape[0]} rows")
    state.check_finite(state.gcns[view], f"gcns.{view}")

    out = z
    for layer in state.gcns[view]:
        out = layer(out, norm_adj)
    return out


def classify(embedding: torch.Tensor, state: ModelState) -> torch.Tensor:
    """Shared classifier logits (softmax is applied by the caller)"""
    state.check_finite(state.classifier, "classifier")
    return state.classifier(embedding)


# ============================================================================
# FULL-DATASET REPRESENTATIONS
# ============================================================================

@dataclass
class Representations:
    """Per-view latent (Z^v) and semantic (H^v) rows, N x d each, NaN where unobserved"""
    latent: List[np.ndarray]
    semantic: List[np.ndarray]

    def observed_semantic(self, view: int, mask: np.ndarray) -> np.ndarray:
        return self.semantic[view][mask[:, view]]


def represent(state: ModelState, dataset: MultiViewDataset) -> Representations:
    """Encode every observed row of every view without tracking gradients"""
    n, d = dataset.n_instances, state.spec.latent_dim
    latent, semantic = [], []
    with torch.no_grad():
        for v in range(dataset.n_views):
            z_full = np.full((n, d), np.nan)
            h_full = np.full((n, d), np.nan)
            rows = dataset.mask[:, v]
            if rows.any():
                z = encode(dataset.views[v][rows], v, state)
                z_full[rows] = z.double().numpy()
                h_full[rows] = contrastive_head(z, state).double().numpy()
            latent.append(z_full)
            semantic.append(h_full)
    return Representations(latent=latent, semantic=semantic)
