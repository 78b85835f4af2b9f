"""Core data types, hyperparameters and dataset handling"""

from .errors import (
    FreeCSLError, DatasetLoadError, DatasetFormatError, DataValidationError,
    UnsatisfiableMaskError, ViewIndexError, ShapeError, ConfigError,
    ContractViolationError, GraphError, ClusteringError, NonFiniteError,
    TrainingDivergedError,
)
from .models import (
    SENTINEL, MaskProtocol, PredictionMode, TrainingStage, MaskSpec, MultiViewDataset,
    FusionWeights, PrototypeSet, AssignmentBundle, ViewGraph, EpochReport, MetricReport,
)
from .hyperparams import ArchitectureConfig, CslConfig, CseConfig, TrainConfig
from .dataset import (
    load_dataset, save_dataset, generate_mask, read_mask, write_mask,
    normalize, paired_indices, observed_rows, make_synthetic_dataset,
)

__all__ = [
    'FreeCSLError', 'DatasetLoadError', 'DatasetFormatError', 'DataValidationError',
    'UnsatisfiableMaskError', 'ViewIndexError', 'ShapeError', 'ConfigError',
    'ContractViolationError', 'GraphError', 'ClusteringError', 'NonFiniteError',
    'TrainingDivergedError',
    'SENTINEL', 'MaskProtocol', 'PredictionMode', 'TrainingStage', 'MaskSpec', 'MultiViewDataset',
    'FusionWeights', 'PrototypeSet', 'AssignmentBundle', 'ViewGraph', 'EpochReport', 'MetricReport',
    'ArchitectureConfig', 'CslConfig', 'CseConfig', 'TrainConfig',
    'load_dataset', 'save_dataset', 'generate_mask', 'read_mask', 'write_mask',
    'normalize', 'paired_indices', 'observed_rows', 'make_synthetic_dataset',
]
