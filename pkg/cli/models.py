# cli/models.py - Experiment configuration and the flat key=value file format
"""
Experiment config files are flat ``key=value`` lines (``#`` starts a comment),
read with python-dotenv. Lists are comma-separated. Recognized keys:

    dataset           dataset directory (required)
    rates             missing rates, e.g. 0.1,0.3,0.5,0.7
    repeats           seeds 0..repeats-1 when `seeds` is absent
    seeds             explicit seed list
    modes             freecsl,ilr,isr
    ablation          true runs the four use_cc/use_gc combinations
    tau alpha sinkhorn_iters prototype_space          consensus learning
    zeta lambda gamma                                 graph clustering
    lr_warmup lr_finetune warmup_epochs finetune_epochs batch_size seed kmeans_n_init
    use_cc use_gc
    hidden_dims latent_dim gcn_hidden dtype           architecture
    checkpoint_every eval_every output
    zetas lambdas sensitivity_rate                    sensitivity grid
"""
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.errors import ConfigError, DatasetLoadError
from core.hyperparams import TrainConfig
from core.models import PredictionMode

# flat key -> (section, field); section None means an ExperimentConfig field
FLAT_KEYS: Dict[str, tuple] = {
    'dataset': (None, 'dataset'),
    'rates': (None, 'rates'),
    'repeats': (None, 'repeats'),
    'seeds': (None, 'seeds'),
    'modes': (None, 'modes'),
    'ablation': (None, 'ablation'),
    'checkpoint_every': (None, 'checkpoint_every'),
    'eval_every': (None, 'eval_every'),
    'output': (None, 'output'),
    'zetas': (None, 'zetas'),
    'lambdas': (None, 'lambdas'),
    'sensitivity_rate': (None, 'sensitivity_rate'),
    'tau': ('csl', 'temperature'),
    'alpha': ('csl', 'alpha'),
    'sinkhorn_iters': ('csl', 'sinkhorn_iters'),
    'prototype_space': ('csl', 'prototype_space'),
    'zeta': ('cse', 'neighbors'),
    'lambda': ('cse', 'kl_weight'),
    'gamma': ('cse', 't_dof'),
    'hidden_dims': ('architecture', 'hidden_dims'),
    'latent_dim': ('architecture', 'latent_dim'),
    'gcn_hidden': ('architecture', 'gcn_hidden'),
    'dtype': ('architecture', 'dtype'),
    'lr_warmup': ('train', 'lr_warmup'),
    'lr_finetune': ('train', 'lr_finetune'),
    'warmup_epochs': ('train', 'warmup_epochs'),
    'finetune_epochs': ('train', 'finetune_epochs'),
    'batch_size': ('train', 'batch_size'),
    'seed': ('train', 'seed'),
    'kmeans_n_init': ('train', 'kmeans_n_init'),
    'use_cc': ('train', 'use_cc'),
    'use_gc': ('train', 'use_gc'),
}

LIST_KEYS = {'rates', 'seeds', 'modes', 'hidden_dims', 'zetas', 'lambdas'}


class ExperimentConfig(BaseModel):
    """One experiment: dataset, missing rates, repeats, modes and the training setup"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    dataset: str
    rates: List[float] = Field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7])
    repeats: int = 1
    seeds: Optional[List[int]] = None
    modes: List[PredictionMode] = Field(default_factory=lambda: [PredictionMode.FREECSL])
    ablation: bool = False
    checkpoint_every: int = 0
    eval_every: int = 0
    output: Optional[str] = None
    zetas: List[int] = Field(default_factory=lambda: [1, 3, 5, 10])
    lambdas: List[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2, 0.3])
    sensitivity_rate: float = 0.5
    train: TrainConfig = Field(default_factory=TrainConfig)

    @field_validator('rates')
    def validate_rates(cls, v):
        if not v:
            raise ValueError('at least one missing rate is required')
        for rate in v:
            if not 0.0 <= rate < 1.0:
                raise ValueError(f'missing rates must lie in [0, 1), got {rate}')
        return v

    @field_validator('sensitivity_rate')
    def validate_sensitivity_rate(cls, v):
        if not 0.0 <= v < 1.0:
            raise ValueError('sensitivity_rate must lie in [0, 1)')
        return v

    @field_validator('repeats')
    def validate_repeats(cls, v):
        if v < 1:
            raise ValueError('repeats must be at least 1')
        return v

    @field_validator('checkpoint_every', 'eval_every')
    def validate_cadence(cls, v):
        if v < 0:
            raise ValueError('must be non-negative')
        return v

    @field_validator('seeds')
    def validate_seeds(cls, v):
        if v is not None and not v:
            raise ValueError('seeds may not be empty')
        return v

    def seed_list(self) -> List[int]:
        return list(self.seeds) if self.seeds is not None else list(range(self.repeats))

    def ablation_configs(self) -> List[TrainConfig]:
        """The four use_cc/use_gc combinations, baseline first, or just the configured one"""
        if not self.ablation:
            return [self.train]
        return [
            self.train.model_copy(update={'use_cc': use_cc, 'use_gc': use_gc})
            for use_cc, use_gc in ((False, False), (True, False), (False, True), (True, True))
        ]


def _split(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(',') if item.strip()]
    return value


def from_flat(values: Mapping[str, Any]) -> ExperimentConfig:
    """Build an ExperimentConfig from flat keys; raises ConfigError on unknown keys"""
    values = {k: v for k, v in values.items() if v is not None and v != ""}
    unknown = sorted(set(values) - set(FLAT_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    top: Dict[str, Any] = {}
    sections: Dict[str, Dict[str, Any]] = {'csl': {}, 'cse': {}, 'architecture': {}, 'train': {}}
    for key, raw in values.items():
        value = _split(raw) if key in LIST_KEYS else raw
        section, name = FLAT_KEYS[key]
        if section is None:
            top[name] = value
        else:
            sections[section][name] = value

    architecture = sections['architecture']
    if 'gcn_hidden' in architecture:
        latent = architecture.get('latent_dim', 64)
        architecture['gcn_dims'] = [architecture.pop('gcn_hidden'), latent]
    elif 'latent_dim' in architecture:
        architecture['gcn_dims'] = [128, architecture['latent_dim']]

    train = dict(sections['train'])
    for section in ('csl', 'cse', 'architecture'):
        if sections[section]:
            train[section] = sections[section]
    top['train'] = train
    return ExperimentConfig.model_validate(top)


def read_config_file(path: Union[str, Path]) -> Dict[str, Optional[str]]:
    path = Path(path)
    if not path.is_file():
        raise DatasetLoadError(f"config file not found: {path}")
    return dict(dotenv_values(path))


def load_experiment_config(path: Optional[Union[str, Path]] = None,
                           overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Config file values, then command-line overrides (later wins)"""
    values: Dict[str, Any] = read_config_file(path) if path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return from_flat(values)


def _join(items) -> str:
    return ",".join(str(getattr(item, "value", item)) for item in items)


def train_to_flat(t: TrainConfig) -> Dict[str, str]:
    """Flat keys describing a TrainConfig"""
    return {
        'tau': str(t.csl.temperature),
        'alpha': str(t.csl.alpha),
        'sinkhorn_iters': str(t.csl.sinkhorn_iters),
        'prototype_space': t.csl.prototype_space,
        'zeta': str(t.cse.neighbors),
        'lambda': str(t.cse.kl_weight),
        'gamma': str(t.cse.t_dof),
        'hidden_dims': _join(t.architecture.hidden_dims),
        'latent_dim': str(t.architecture.latent_dim),
        'gcn_hidden': str(t.architecture.gcn_dims[0]),
        'dtype': t.architecture.dtype,
        'lr_warmup': str(t.lr_warmup),
        'lr_finetune': str(t.lr_finetune),
        'warmup_epochs': str(t.warmup_epochs),
        'finetune_epochs': str(t.finetune_epochs),
        'batch_size': str(t.batch_size),
        'seed': str(t.seed),
        'kmeans_n_init': str(t.kmeans_n_init),
        'use_cc': str(t.use_cc).lower(),
        'use_gc': str(t.use_gc).lower(),
    }


def to_flat(config: ExperimentConfig) -> Dict[str, str]:
    """Inverse of from_flat, used to record the effective configuration of a run"""
    flat = {
        'dataset': config.dataset,
        'rates': _join(config.rates),
        'repeats': str(config.repeats),
        'modes': _join(config.modes),
        'ablation': str(config.ablation).lower(),
        'checkpoint_every': str(config.checkpoint_every),
        'eval_every': str(config.eval_every),
        'zetas': _join(config.zetas),
        'lambdas': _join(config.lambdas),
        'sensitivity_rate': str(config.sensitivity_rate),
        **train_to_flat(config.train),
    }
    if config.seeds is not None:
        flat['seeds'] = _join(config.seeds)
    if config.output:
        flat['output'] = config.output
    return flat
