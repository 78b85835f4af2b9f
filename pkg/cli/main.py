# cli/main.py - Argument parsing, logging setup and exit-code mapping
import argparse
import logging
import sys
import traceback
from typing import List, Optional

import torch
from pydantic import ValidationError

from config import Config
from core.errors import ConfigError, FreeCSLError, UnsatisfiableMaskError

from .commands import cmd_eval, cmd_mask, cmd_sensitivity, cmd_sweep, cmd_synth, cmd_train
from .models import FLAT_KEYS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

CONFIG_ERRORS = (ValidationError, ConfigError, UnsatisfiableMaskError)


def add_config_flags(parser: argparse.ArgumentParser):
    """--config plus one override flag per flat config key (e.g. --warmup-epochs, --lambda)"""
    parser.add_argument("--config", help="flat key=value experiment config file")
    group = parser.add_argument_group("config overrides")
    for key in FLAT_KEYS:
        group.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar="VALUE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_experiments.py",
        description="Consensus semantic learning for incomplete multi-view clustering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mask = sub.add_parser("mask", help="write a missing-view mask for a dataset")
    mask.add_argument("--dataset", required=True)
    mask.add_argument("--rate", type=float, required=True)
    mask.add_argument("--seed", type=int, default=0)
    mask.add_argument("--out", help="mask file path (default <output root>/mask.csv)")
    mask.set_defaults(handler=cmd_mask)

    train = sub.add_parser("train", help="warm-up and fine-tune one model")
    add_config_flags(train)
    train.add_argument("--mask", help="mask file to apply instead of the dataset's own")
    train.add_argument("--rate", type=float, help="generate a mask with this missing rate (seeded by --seed)")
    train.add_argument("--out", help="run directory")
    train.add_argument("--export-graphs", action="store_true", help="write per-view KNN edge lists")
    train.add_argument("--progress", action="store_true", help="show progress bars")
    train.set_defaults(handler=cmd_train)

    evaluate = sub.add_parser("eval", help="evaluate a checkpoint")
    add_config_flags(evaluate)
    evaluate.add_argument("--checkpoint", required=True)
    evaluate.add_argument("--mask")
    evaluate.add_argument("--rate", type=float)
    evaluate.add_argument("--mode", choices=["freecsl", "ilr", "isr"], default="freecsl")
    evaluate.add_argument("--diagnostics", action="store_true",
                          help="heatmaps for Z, Z^v and H^v as well as the consensus H")
    evaluate.add_argument("--out")
    evaluate.set_defaults(handler=cmd_eval)

    sweep = sub.add_parser("sweep", help="train and evaluate across missing rates and seeds")
    add_config_flags(sweep)
    sweep.add_argument("--out")
    sweep.set_defaults(handler=cmd_sweep)

    sensitivity = sub.add_parser("sensitivity", help="neighbors x KL-weight grid")
    add_config_flags(sensitivity)
    sensitivity.add_argument("--out")
    sensitivity.set_defaults(handler=cmd_sensitivity)

    synth = sub.add_parser("synth", help="generate a synthetic Gaussian-blob dataset")
    synth.add_argument("--out", required=True)
    synth.add_argument("--n", type=int, default=600)
    synth.add_argument("--k", type=int, default=3)
    synth.add_argument("--dims", default="10,10")
    synth.add_argument("--separation", type=float, default=6.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.set_defaults(handler=cmd_synth)

    return parser


def configure_logging():
    logging.basicConfig(
        level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()

    try:
        Config.validate()
    except ValueError as e:
        print(f"❌ {e}")
        return EXIT_CONFIG
    torch.set_num_threads(Config.NUM_THREADS)

    try:
        return args.handler(args)
    except CONFIG_ERRORS as e:
        print(f"❌ Invalid configuration: {e}")
        return EXIT_CONFIG
    except FreeCSLError as e:
        print(f"❌ {type(e).__name__}: {e}")
        if Config.DEBUG:
            traceback.print_exc()
        return EXIT_RUNTIME
    except Exception as e:
        print(f"❌ Unexpected error: {e}")
        if Config.DEBUG:
            traceback.print_exc()
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
