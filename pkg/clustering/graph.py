# clustering/graph.py - KNN graphs, modularity and GCN-based graph clustering loss
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import torch
from scipy.spatial.distance import cdist

from core.errors import ConfigError, GraphError, NonFiniteError, ShapeError
from core.hyperparams import CseConfig
from core.models import MultiViewDataset, ViewGraph
from nets.model import ModelState, classify, encode, gcn_forward

from .consensus import safe_log

logger = logging.getLogger(__name__)


# ============================================================================
# GRAPHS
# ============================================================================

def knn_adjacency(x: np.ndarray, neighbors: int, nodes: Optional[np.ndarray] = None) -> ViewGraph:
    """
    Symmetric KNN graph: a_ij = 1 iff i is among j's `neighbors` nearest or j among i's.

    Euclidean distance, self excluded, ties broken toward the lower index.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if neighbors < 1:
        raise ConfigError(f"neighbors must be at least 1, got {neighbors}")
    if neighbors >= n:
        raise ConfigError(f"neighbors={neighbors} needs more than {n} observed rows")
    if not np.isfinite(x).all():
        raise NonFiniteError("knn_adjacency received non-finite rows")

    dist = cdist(x, x, metric="sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :neighbors]

    adjacency = np.zeros((n, n), dtype=np.float64)
    adjacency[np.arange(n)[:, None], nearest] = 1.0
    adjacency = np.maximum(adjacency, adjacency.T)

    return ViewGraph(adjacency=adjacency, nodes=np.arange(n) if nodes is None else np.asarray(nodes))


def build_view_graphs(dataset: MultiViewDataset, neighbors: int) -> List[ViewGraph]:
    """One graph per view over its observed rows, in instance order"""
    graphs = []
    for v in range(dataset.n_views):
        rows = np.flatnonzero(dataset.mask[:, v])
        graph = knn_adjacency(dataset.views[v][rows], neighbors, nodes=rows)
        logger.debug("View %d graph: %d nodes, %d edges", v, graph.n_nodes, int(graph.edge_count))
        graphs.append(graph)
    return graphs


def modularity_matrix(graph: ViewGraph) -> np.ndarray:
    """B = A - d d^T / 2m"""
    if graph.edge_count <= 0:
        raise GraphError("modularity is undefined for a graph without edges")
    d = graph.degrees
    return graph.adjacency - np.outer(d, d) / (2.0 * graph.edge_count)


def export_edge_list(graph: ViewGraph, path: Union[str, Path]) -> Path:
    """Write one 'i j' line per undirected edge (i < j), using instance ids"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    src, dst = np.nonzero(np.triu(graph.adjacency, k=1))
    edges = np.stack([graph.nodes[src], graph.nodes[dst]], axis=1)
    np.savetxt(path, edges, fmt="%d", delimiter=" ")
    return path


# ============================================================================
# ASSIGNMENTS
# ============================================================================

def node_assign(z: torch.Tensor, graph: ViewGraph, view: int, state: ModelState) -> torch.Tensor:
    """GCN soft assignment P_v, rows sum to 1"""
    return torch.softmax(classify(gcn_forward(z, graph.adjacency, view, state), state), dim=1)


@torch.no_grad()
def t_dist_labels(h: Union[np.ndarray, torch.Tensor], prototypes: Union[np.ndarray, torch.Tensor],
                  dof: float = 1.0) -> torch.Tensor:
    """Student's-t self-labels: (1 + ||h_i - c_k||^2 / dof)^(-(dof+1)/2), normalized over k"""
    if dof <= 0:
        raise ConfigError(f"t_dof must be positive, got {dof}")
    h = torch.as_tensor(h, dtype=torch.float64)
    c = torch.as_tensor(prototypes, dtype=torch.float64)
    sq_dist = ((h[:, None, :] - c[None, :, :]) ** 2).sum(dim=2)
    kernel = (1.0 + sq_dist / dof) ** (-(dof + 1.0) / 2.0)
    return kernel / kernel.sum(dim=1, keepdim=True)


# ============================================================================
# LOSSES
# ============================================================================

def kl_modularity_loss(p: torch.Tensor, modularity: Union[np.ndarray, torch.Tensor],
                       labels: torch.Tensor, kl_weight: float, edge_count: float) -> torch.Tensor:
    """-(1/2m) Tr(P^T B P) + lambda * KL(L || P)"""
    b = torch.as_tensor(modularity, dtype=p.dtype)
    labels = labels.to(p.dtype)
    n = p.shape[0]
    if b.shape != (n, n) or labels.shape != p.shape:
        raise ShapeError(f"P {tuple(p.shape)}, B {tuple(b.shape)} and L {tuple(labels.shape)} disagree")
    if edge_count <= 0:
        raise GraphError("modularity loss needs at least one edge")

    modularity_term = -torch.trace(p.T @ b @ p) / (2.0 * edge_count)
    kl_term = (labels * (safe_log(labels) - safe_log(p))).sum()
    return modularity_term + kl_weight * kl_term


def total_gc_loss(state: ModelState, dataset: MultiViewDataset, graphs: Sequence[ViewGraph],
                  labels: Sequence[torch.Tensor], config: CseConfig) -> torch.Tensor:
    """Sum over views of the KL-modularity loss on each view's full observed graph"""
    if len(graphs) != dataset.n_views or len(labels) != dataset.n_views:
        raise ShapeError(f"need one graph and one label set per view ({dataset.n_views})")

    total = torch.zeros((), dtype=state.dtype)
    for v, graph in enumerate(graphs):
        z = encode(dataset.views[v][graph.nodes], v, state)
        p = node_assign(z, graph, v, state)
        total = total + kl_modularity_loss(
            p, modularity_matrix(graph), labels[v], config.kl_weight, graph.edge_count
        )
    return total
