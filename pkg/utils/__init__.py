"""Evaluation metrics and representation diagnostics"""

from .metrics import (
    clustering_accuracy, nmi, ari, evaluate, semantic_consensus,
    paired_consensus_rate, consensus_rate,
)
from .diagnostics import similarity_matrix, similarity_entropy, write_heatmap, representation_diagnostics

__all__ = [
    'clustering_accuracy', 'nmi', 'ari', 'evaluate', 'semantic_consensus',
    'paired_consensus_rate', 'consensus_rate',
    'similarity_matrix', 'similarity_entropy', 'write_heatmap', 'representation_diagnostics',
]
