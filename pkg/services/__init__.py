"""Services module for the experiment runner.
Training, imputation baselines and experiment orchestration.
"""
from .trainer import (
    LossBreakdown, reconstruction_loss, overall_loss, warmup, finetune, predict,
    consensus_semantics, iterate_batches,
)
from .imputation import impute_rows, impute_baseline
from .experiment import ExperimentService, RESULT_COLUMNS, aggregate_cells, results_table

__all__ = [
    'LossBreakdown', 'reconstruction_loss', 'overall_loss', 'warmup', 'finetune', 'predict',
    'consensus_semantics', 'iterate_batches',
    'impute_rows', 'impute_baseline',
    'ExperimentService', 'RESULT_COLUMNS', 'aggregate_cells', 'results_table',
]
