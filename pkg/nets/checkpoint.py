# nets/checkpoint.py - Versioned single-file checkpoints
"""
checkpoint.bin is a torch.save archive of a plain dict:

    format      "freecsl-checkpoint"
    version     integer, currently 1
    spec        ModelSpec.to_dict() (view dims, K, hidden/latent/GCN widths, dtype)
    state_dict  parameter tensors keyed by module path, in registration order:
                encoders.<v>.<layer>.{weight,bias}     weight shape (out, in)
                decoders.<v>.<layer>.{weight,bias}
                gcns.<v>.<layer>.{weight,skip}.weight  no biases
                head.{weight,bias}                     (d, d), (d,)
                classifier.{weight,bias}               (K, gcn_out), (K,)
    config      TrainConfig.model_dump() or None
    epoch       last completed epoch or None
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import torch

from core.errors import DatasetFormatError, DatasetLoadError
from core.hyperparams import TrainConfig

from .model import ModelSpec, ModelState

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "freecsl-checkpoint"
CHECKPOINT_VERSION = 1
CHECKPOINT_FILE = "checkpoint.bin"


def save_checkpoint(state: ModelState, path: Union[str, Path], config: Optional[TrainConfig] = None,
                    epoch: Optional[int] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        'format': CHECKPOINT_FORMAT,
        'version': CHECKPOINT_VERSION,
        'spec': state.spec.to_dict(),
        'state_dict': {k: v.detach().clone() for k, v in state.state_dict().items()},
        'config': config.model_dump() if config is not None else None,
        'epoch': epoch,
    }
    torch.save(payload, path)
    logger.info("Saved checkpoint to %s", path)
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[ModelState, Dict[str, Any]]:
    """Restore a ModelState; returns (state, metadata without the tensors)"""
    path = Path(path)
    if not path.is_file():
        raise DatasetLoadError(f"checkpoint not found: {path}")

    payload = torch.load(path, map_location="cpu", weights_only=True)
    if payload.get('format') != CHECKPOINT_FORMAT:
        raise DatasetFormatError(f"{path} is not a checkpoint file")
    if payload.get('version') != CHECKPOINT_VERSION:
        raise DatasetFormatError(f"unsupported checkpoint version {payload.get('version')}")

    spec = ModelSpec(**payload['spec'])
    state = ModelState(spec).to(spec.torch_dtype)
    state.load_state_dict(payload['state_dict'])

    metadata = {k: v for k, v in payload.items() if k != 'state_dict'}
    return state, metadata
