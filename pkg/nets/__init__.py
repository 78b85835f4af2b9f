"""Network definitions, gradient tape and checkpoints"""

from .layers import Activation, LayerSpec, GraphConvolution, mlp, normalized_adjacency
from .model import (
    ModelSpec, ModelState, Representations, init_params, encode, decode,
    contrastive_head, gcn_forward, classify, represent,
)
from .autograd import GradientTape, backward, apply_gradients
from .checkpoint import CHECKPOINT_FILE, save_checkpoint, load_checkpoint

__all__ = [
    'Activation', 'LayerSpec', 'GraphConvolution', 'mlp', 'normalized_adjacency',
    'ModelSpec', 'ModelState', 'Representations', 'init_params', 'encode', 'decode',
    'contrastive_head', 'gcn_forward', 'classify', 'represent',
    'GradientTape', 'backward', 'apply_gradients',
    'CHECKPOINT_FILE', 'save_checkpoint', 'load_checkpoint',
]
