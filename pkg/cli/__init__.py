"""Command-line experiment runner"""

from .main import main, build_parser, EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG
from .models import ExperimentConfig, from_flat, load_experiment_config

__all__ = [
    'main', 'build_parser', 'EXIT_OK', 'EXIT_RUNTIME', 'EXIT_CONFIG',
    'ExperimentConfig', 'from_flat', 'load_experiment_config',
]
