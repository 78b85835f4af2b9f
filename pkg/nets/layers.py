# nets/layers.py - Layer specs, MLP builder and graph convolution
from dataclasses import dataclass
from enum import Enum
from typing import List, Union

import numpy as np
import torch
from torch import nn

from core.errors import ConfigError, GraphError, ShapeError


class Activation(Enum):
    RELU = "relu"
    NONE = "none"
    SOFTMAX = "softmax"


@dataclass
class LayerSpec:
    """One affine layer and the activation applied to its output"""
    in_dim: int
    out_dim: int
    activation: Activation = Activation.RELU

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ConfigError(f"layer dims must be positive, got {self.in_dim} -> {self.out_dim}")
        if isinstance(self.activation, str):
            self.activation = Activation(self.activation)


def activate(x: torch.Tensor, activation: Activation) -> torch.Tensor:
    if activation is Activation.RELU:
        return torch.relu(x)
    if activation is Activation.SOFTMAX:
        return torch.softmax(x, dim=-1)
    return x


def mlp(specs: List[LayerSpec]) -> nn.Sequential:
    """Stack of Linear layers, each followed by its spec's activation"""
    layers: List[nn.Module] = []
    for spec in specs:
        layers.append(nn.Linear(spec.in_dim, spec.out_dim))
        if spec.activation is Activation.RELU:
            layers.append(nn.ReLU())
        elif spec.activation is Activation.SOFTMAX:
            layers.append(nn.Softmax(dim=-1))
    return nn.Sequential(*layers)


def normalized_adjacency(adjacency: Union[np.ndarray, torch.Tensor],
                         dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """
    D^{-1/2} A D^{-1/2} for a symmetric 0/1 adjacency.

    Isolated nodes get a zero row and column, so they only see the skip term.
    """
    a = torch.as_tensor(adjacency, dtype=dtype)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"adjacency must be square, got {tuple(a.shape)}")
    if not torch.equal(a, a.T):
        raise GraphError("adjacency must be symmetric")

    degrees = a.sum(dim=1)
    inv_sqrt = torch.where(degrees > 0, degrees.clamp_min(1.0).rsqrt(), torch.zeros_like(degrees))
    return inv_sqrt[:, None] * a * inv_sqrt[None, :]


class GraphConvolution(nn.Module):
    """sigma(A_hat Z W + Z W_s): normalized neighbor aggregation plus a skip path"""

    def __init__(self, spec: LayerSpec):
        super().__init__()
        self.spec = spec
        self.weight = nn.Linear(spec.in_dim, spec.out_dim, bias=False)
        self.skip = nn.Linear(spec.in_dim, spec.out_dim, bias=False)

    def forward(self, z: torch.Tensor, norm_adj: torch.Tensor) -> torch.Tensor:
        out = norm_adj @ self.weight(z) + self.skip(z)
        return activate(out, self.spec.activation)
