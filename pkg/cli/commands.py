# cli/commands.py - Subcommand implementations
import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from config import Config
from core.dataset import generate_mask, load_dataset, make_synthetic_dataset, read_mask, save_dataset, write_mask
from core.errors import ConfigError, DataValidationError, ShapeError
from core.hyperparams import TrainConfig
from core.models import MaskSpec, PredictionMode
from nets.checkpoint import CHECKPOINT_FILE, load_checkpoint
from services.experiment import RESULT_COLUMNS, RESULTS_FILE, ExperimentService
from utils.diagnostics import representation_diagnostics

from .models import (
    FLAT_KEYS, ExperimentConfig, from_flat, load_experiment_config, read_config_file,
    to_flat, train_to_flat,
)

logger = logging.getLogger(__name__)


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Flat config keys given on the command line"""
    return {key: getattr(args, key, None) for key in FLAT_KEYS if getattr(args, key, None) is not None}


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    return load_experiment_config(getattr(args, 'config', None), config_overrides(args))


def eval_config(args: argparse.Namespace, stored: Optional[Dict[str, Any]]) -> ExperimentConfig:
    """Checkpoint's training config, then the config file, then command-line flags"""
    values: Dict[str, Any] = {}
    if stored:
        values.update(train_to_flat(TrainConfig.model_validate(stored)))
    if getattr(args, 'config', None):
        values.update(read_config_file(args.config))
    values.update(config_overrides(args))
    return from_flat(values)


def output_dir(args: argparse.Namespace, config: Optional[ExperimentConfig] = None) -> Path:
    """--out flag, then the config's `output`, then the environment/default output root"""
    explicit = getattr(args, 'out', None) or (config.output if config else None)
    return Config.resolve_output_root(explicit)


def _mask_spec(rate: float, seed: int) -> MaskSpec:
    try:
        return MaskSpec(missing_rate=rate, seed=seed)
    except DataValidationError as e:
        raise ConfigError(str(e)) from e


def _load_mask(args: argparse.Namespace, n: int, v: int, seed: int) -> Optional[np.ndarray]:
    if getattr(args, 'mask', None):
        return read_mask(args.mask)
    if getattr(args, 'rate', None) is not None:
        return generate_mask(n, v, _mask_spec(args.rate, seed))
    return None


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_mask(args: argparse.Namespace) -> int:
    """Write mask.csv for a dataset under the instance-incomplete protocol"""
    dataset = load_dataset(args.dataset)
    mask = generate_mask(dataset.n_instances, dataset.n_views, _mask_spec(args.rate, args.seed))
    path = Path(args.out) if args.out else Config.resolve_output_root() / "mask.csv"
    write_mask(mask, path)
    incomplete = int((~mask.all(axis=1)).sum())
    print(f"✅ Mask written to {path} ({incomplete}/{dataset.n_instances} incomplete instances)")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    """Generate a Gaussian-blob multi-view dataset directory"""
    dims = [int(d) for d in args.dims.split(',')]
    dataset = make_synthetic_dataset(n=args.n, n_clusters=args.k, dims=dims,
                                     separation=args.separation, seed=args.seed, name=Path(args.out).name)
    save_dataset(dataset, args.out)
    print(f"✅ Synthetic dataset written to {args.out} (N={args.n}, K={args.k}, dims={dims})")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    """Warm-up and fine-tune one model; writes checkpoint.bin and epochs.log"""
    config = resolve_config(args)
    out = output_dir(args, config)
    train = config.train

    service = ExperimentService(config.dataset, out)
    base = service.load()
    mask = _load_mask(args, base.n_instances, base.n_views, train.seed)
    dataset = service.masked_dataset(None, train.seed, mask=mask)

    print(f"🚀 Training {train.ablation_tag} on {dataset.name}: "
          f"{train.warmup_epochs} warm-up + {train.finetune_epochs} fine-tune epochs")
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text("".join(f"{k}={v}\n" for k, v in to_flat(config).items()))
    if mask is not None:
        write_mask(dataset.mask, out / "mask.csv")

    _, reports = service.train(
        dataset, train, out_dir=out, checkpoint_every=config.checkpoint_every,
        eval_every=config.eval_every, export_graphs=args.export_graphs, progress=args.progress,
    )
    if reports:
        print(f"📊 Final epoch: {reports[-1].to_dict()}")
    print(f"✅ Checkpoint written to {out / CHECKPOINT_FILE}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    """Evaluate a checkpoint under one prediction mode; appends a row to results.csv"""
    state, metadata = load_checkpoint(args.checkpoint)
    config = eval_config(args, metadata.get("config"))
    train = config.train

    out = output_dir(args, config)
    service = ExperimentService(config.dataset, out)
    base = service.load()
    if list(base.dims) != list(state.spec.view_dims) or base.n_clusters != state.spec.n_clusters:
        raise ShapeError(
            f"checkpoint expects dims {state.spec.view_dims} and K={state.spec.n_clusters}, "
            f"dataset has dims {base.dims} and K={base.n_clusters}"
        )
    mask = _load_mask(args, base.n_instances, base.n_views, train.seed)
    dataset = service.masked_dataset(None, train.seed, mask=mask)

    mode = PredictionMode(args.mode)
    result = service.evaluate(state, dataset, mode, train)
    rate = args.rate if args.rate is not None else float((~dataset.mask.all(axis=1)).mean())
    row = {
        'row_type': 'cell', 'dataset': service.dataset_name, 'rate': rate, 'seed': train.seed,
        **{k: v for k, v in result.items() if k != 'predictions'},
        'status': 'ok', 'error': '',
    }

    out.mkdir(parents=True, exist_ok=True)
    results_path = out / RESULTS_FILE
    frame = pd.DataFrame([row], columns=RESULT_COLUMNS)
    frame.to_csv(results_path, mode="a", header=not results_path.exists(), index=False, float_format="%.6f")
    np.savetxt(out / f"predictions_{row['mode']}.csv", result['predictions'], fmt="%d")

    entropies = representation_diagnostics(state, dataset, out, tag=row['mode'], all_families=args.diagnostics)
    print(f"📊 {row['mode']} r={rate:g} seed={train.seed}: "
          f"ACC {row['acc']:.4f}  NMI {row['nmi']:.4f}  ARI {row['ari']:.4f}  consensus {row['consensus']:.4f}")
    print(f"✅ Row appended to {results_path}; similarity entropy of H: {entropies['H']:.4f}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    """Mask/train/evaluate every (objective, rate, seed) cell and write the result tables"""
    config = resolve_config(args)
    out = output_dir(args, config)
    service = ExperimentService(config.dataset, out)
    service.load()

    configs = config.ablation_configs()
    seeds = config.seed_list()
    print(f"🚀 Sweep over rates {config.rates} x seeds {seeds} x {len(configs)} objective(s)")
    service.sweep(config.rates, seeds, configs, list(config.modes), config.checkpoint_every)
    print(f"✅ Results written to {out / RESULTS_FILE}")
    return 0


def cmd_sensitivity(args: argparse.Namespace) -> int:
    """ACC/NMI over the neighbors x KL-weight grid at one missing rate"""
    config = resolve_config(args)
    out = output_dir(args, config)
    service = ExperimentService(config.dataset, out)
    service.load()

    table = service.sensitivity(config.sensitivity_rate, config.seed_list(), config.train,
                                list(config.zetas), list(config.lambdas))
    print(f"✅ Sensitivity grid ({len(table)} rows) written to {out}")
    return 0
