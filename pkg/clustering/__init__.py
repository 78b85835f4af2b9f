"""Fusion, prototypes, consensus semantic learning and graph clustering"""

from .kmeans import kmeans, inertia
from .fusion import anchor_rows, completeness_weights, fuse, consensus_prototypes, per_view_prototypes
from .consensus import (
    PairLoss, soft_assign, sinkhorn_plan, sinkhorn_labels, transport_objective,
    swapped_kd_pair, solve_pair_targets, total_cc_loss,
)
from .graph import (
    knn_adjacency, build_view_graphs, modularity_matrix, export_edge_list,
    node_assign, t_dist_labels, kl_modularity_loss, total_gc_loss,
)

__all__ = [
    'kmeans', 'inertia',
    'anchor_rows', 'completeness_weights', 'fuse', 'consensus_prototypes', 'per_view_prototypes',
    'PairLoss', 'soft_assign', 'sinkhorn_plan', 'sinkhorn_labels', 'transport_objective',
    'swapped_kd_pair', 'solve_pair_targets', 'total_cc_loss',
    'knn_adjacency', 'build_view_graphs', 'modularity_matrix', 'export_edge_list',
    'node_assign', 't_dist_labels', 'kl_modularity_loss', 'total_gc_loss',
]
