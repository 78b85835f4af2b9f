# services/experiment.py - Experiment orchestration: cells, sweeps and sensitivity grids
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from clustering.fusion import consensus_prototypes
from clustering.graph import build_view_graphs, export_edge_list
from core.dataset import generate_mask, load_dataset, normalize
from core.errors import FreeCSLError
from core.hyperparams import TrainConfig
from core.models import EpochReport, MaskSpec, MultiViewDataset, PredictionMode
from nets.checkpoint import CHECKPOINT_FILE, save_checkpoint
from nets.model import ModelSpec, ModelState, init_params
from utils.metrics import consensus_rate, evaluate

from .imputation import impute_baseline
from .trainer import consensus_semantics, finetune, predict, warmup

logger = logging.getLogger(__name__)

EPOCH_LOG_FILE = "epochs.log"
RESULTS_FILE = "results.csv"
RESULTS_TABLE_FILE = "results_table.csv"
SENSITIVITY_FILE = "sensitivity.csv"

# Column set of results.csv; row_type is "cell" or "aggregate"
RESULT_COLUMNS = [
    'row_type', 'dataset', 'mode', 'use_cc', 'use_gc', 'rate', 'seed',
    'acc', 'nmi', 'ari', 'consensus', 'acc_std', 'nmi_std', 'ari_std', 'status', 'error',
]
SENSITIVITY_COLUMNS = ['zeta', 'lambda', 'rate', 'seed', 'acc', 'nmi', 'ari', 'status', 'error']
METRICS = ['acc', 'nmi', 'ari']


class EpochLogWriter:
    """Streams EpochReports as JSON lines, flushed per epoch so partial logs survive a crash"""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text("")
        self.lines = 0

    def __call__(self, report: EpochReport):
        with self.path.open("a") as handle:
            handle.write(json.dumps(report.to_dict()) + "\n")
        self.lines += 1


def mode_tag(mode: PredictionMode, config: TrainConfig) -> str:
    """Value of the `mode` column: ilr/isr, freecsl, or the ablation tag for partial objectives"""
    if mode is not PredictionMode.FREECSL:
        return mode.value
    if config.use_cc and config.use_gc:
        return PredictionMode.FREECSL.value
    return config.ablation_tag


class ExperimentService:
    """
    Runs the experiment protocol around the training functions.

    Each (rate, seed) cell masks the dataset, trains a fresh model and evaluates
    it under every requested prediction mode.
    """

    def __init__(self, dataset_path: str, output_root: Path):
        """
        Args:
            dataset_path: dataset directory in the documented layout
            output_root: directory receiving every artifact of the run
        """
        self.dataset_path = dataset_path
        self.output_root = Path(output_root)
        self.base: Optional[MultiViewDataset] = None

        # Service metrics
        self.metrics = {
            "started_at": None,
            "cells_run": 0,
            "cells_succeeded": 0,
            "cells_failed": 0,
        }

    def load(self) -> MultiViewDataset:
        if self.base is None:
            print(f"📊 Loading dataset from {self.dataset_path}...")
            self.base = load_dataset(self.dataset_path)
            self.metrics["started_at"] = datetime.now().isoformat()
        return self.base

    @property
    def dataset_name(self) -> str:
        return Path(self.dataset_path).name

    # ------------------------------------------------------------------
    # SINGLE RUNS
    # ------------------------------------------------------------------

    def masked_dataset(self, rate: Optional[float], seed: int, mask: Optional[np.ndarray] = None) -> MultiViewDataset:
        """Normalized dataset under an explicit mask, a generated one, or its own mask"""
        base = self.load()
        if mask is None and rate is not None:
            mask = generate_mask(base.n_instances, base.n_views, MaskSpec(missing_rate=rate, seed=seed))
        dataset = base.with_mask(mask) if mask is not None else base
        return normalize(dataset)

    def train(self, dataset: MultiViewDataset, config: TrainConfig, out_dir: Optional[Path] = None,
              checkpoint_every: int = 0, eval_every: int = 0, export_graphs: bool = False,
              progress: bool = False) -> Tuple[ModelState, List[EpochReport]]:
        """Warm-up then fine-tune a fresh model; writes epochs.log and checkpoint.bin under out_dir"""
        spec = ModelSpec.from_config(dataset.dims, dataset.n_clusters, config.architecture)
        state = init_params(spec, seed=config.seed)
        reports: List[EpochReport] = []

        writer = EpochLogWriter(out_dir / EPOCH_LOG_FILE) if out_dir is not None else None

        def on_epoch(report: EpochReport):
            if writer:
                writer(report)
            if out_dir is not None and checkpoint_every > 0 and len(reports) % checkpoint_every == 0:
                save_checkpoint(state, out_dir / f"checkpoint_{len(reports):04d}.bin", config, len(reports))

        if export_graphs and out_dir is not None:
            for v, graph in enumerate(build_view_graphs(dataset, config.cse.neighbors)):
                export_edge_list(graph, out_dir / f"graph_view{v}.txt")

        warmup(state, dataset, config, on_epoch=on_epoch, progress=progress, reports=reports)
        finetune(state, dataset, config, on_epoch=on_epoch, progress=progress,
                 eval_every=eval_every, reports=reports)

        if out_dir is not None:
            save_checkpoint(state, out_dir / CHECKPOINT_FILE, config, len(reports))
        return state, reports

    def evaluate(self, state: ModelState, dataset: MultiViewDataset, mode: PredictionMode,
                 config: TrainConfig) -> Dict[str, Any]:
        """Predict under one mode; metric fields are NaN when the dataset has no labels"""
        k = dataset.n_clusters
        if mode is PredictionMode.FREECSL:
            pred = predict(state, dataset, k, seed=config.seed, n_init=config.kmeans_n_init)
        else:
            pred = impute_baseline(state, dataset, mode, neighbors=config.cse.neighbors,
                                   seed=config.seed, n_init=config.kmeans_n_init)

        prototypes = consensus_prototypes(consensus_semantics(state, dataset), k,
                                          seed=config.seed, n_init=config.kmeans_n_init)
        row: Dict[str, Any] = {
            'mode': mode_tag(mode, config),
            'use_cc': config.use_cc,
            'use_gc': config.use_gc,
            'consensus': consensus_rate(state, dataset, prototypes),
            'predictions': pred,
        }
        if dataset.labels is not None:
            row.update(evaluate(pred, dataset.labels, k).to_dict())
        else:
            row.update({metric: float("nan") for metric in METRICS})
        return row

    # ------------------------------------------------------------------
    # SWEEPS
    # ------------------------------------------------------------------

    def run_cell(self, rate: float, seed: int, config: TrainConfig, modes: List[PredictionMode],
                 checkpoint_every: int = 0, cell_tag: Optional[str] = None) -> List[Dict[str, Any]]:
        """
        Train one fresh model for (rate, seed) and evaluate every mode; failures become rows.

        Artifacts go to cells/{tag}_r{rate}_s{seed}, where the tag defaults to the
        ablation tag.
        """
        self.metrics["cells_run"] += 1
        config = config.model_copy(update={'seed': seed})
        base_row = {
            'row_type': 'cell', 'dataset': self.dataset_name, 'use_cc': config.use_cc,
            'use_gc': config.use_gc, 'rate': rate, 'seed': seed,
        }
        cell_dir = self.output_root / "cells" / f"{cell_tag or config.ablation_tag}_r{rate:g}_s{seed}"
        try:
            dataset = self.masked_dataset(rate, seed)
            state, _ = self.train(dataset, config, out_dir=cell_dir, checkpoint_every=checkpoint_every)
            rows = []
            for mode in modes:
                result = self.evaluate(state, dataset, mode, config)
                result.pop('predictions')
                rows.append({**base_row, **result, 'status': 'ok', 'error': ''})
            self.metrics["cells_succeeded"] += 1
            return rows
        except Exception as e:
            self.metrics["cells_failed"] += 1
            if not isinstance(e, FreeCSLError):
                logger.exception("Unexpected failure in cell rate=%s seed=%s", rate, seed)
            print(f"❌ Cell rate={rate} seed={seed} ({config.ablation_tag}) failed: {e}")
            return [
                {**base_row, 'mode': mode_tag(mode, config), 'status': 'failed', 'error': str(e)}
                for mode in modes
            ]

    def sweep(self, rates: List[float], seeds: List[int], configs: List[TrainConfig],
              modes: List[PredictionMode], checkpoint_every: int = 0) -> pd.DataFrame:
        """
        Every (objective, rate, seed) cell, then mean/std aggregates per (mode, rate).

        Writes results.csv (cells + aggregates) and results_table.csv
        (metrics x rates, mean±std in percent).
        """
        rows: List[Dict[str, Any]] = []
        for config in configs:
            for rate in rates:
                for seed in seeds:
                    print(f"🚀 Cell {config.ablation_tag} rate={rate} seed={seed}")
                    rows.extend(self.run_cell(rate, seed, config, modes, checkpoint_every))

        cells = pd.DataFrame(rows, columns=RESULT_COLUMNS)
        results = pd.concat([cells, aggregate_cells(cells)], ignore_index=True)[RESULT_COLUMNS]

        self.output_root.mkdir(parents=True, exist_ok=True)
        results.to_csv(self.output_root / RESULTS_FILE, index=False, float_format="%.6f")
        results_table(results).to_csv(self.output_root / RESULTS_TABLE_FILE)
        print(f"✅ Sweep finished: {self.metrics['cells_succeeded']} cells ok, "
              f"{self.metrics['cells_failed']} failed")
        return results

    def sensitivity(self, rate: float, seeds: List[int], config: TrainConfig,
                    zetas: List[int], lambdas: List[float]) -> pd.DataFrame:
        """ACC/NMI/ARI over a neighbors x KL-weight grid at one missing rate"""
        rows = []
        for zeta in zetas:
            for kl_weight in lambdas:
                cse = config.cse.model_copy(update={'neighbors': zeta, 'kl_weight': kl_weight})
                cell_config = config.model_copy(update={'cse': cse})
                for seed in seeds:
                    print(f"🚀 Sensitivity zeta={zeta} lambda={kl_weight} seed={seed}")
                    tag = f"{cell_config.ablation_tag}_z{zeta}_l{kl_weight:g}"
                    row = self.run_cell(rate, seed, cell_config, [PredictionMode.FREECSL], cell_tag=tag)[0]
                    rows.append({'zeta': zeta, 'lambda': kl_weight, **{k: row.get(k) for k in
                                 ('rate', 'seed', 'acc', 'nmi', 'ari', 'status', 'error')}})

        table = pd.DataFrame(rows, columns=SENSITIVITY_COLUMNS)
        self.output_root.mkdir(parents=True, exist_ok=True)
        table.to_csv(self.output_root / SENSITIVITY_FILE, index=False, float_format="%.6f")
        return table


def aggregate_cells(cells: pd.DataFrame) -> pd.DataFrame:
    """Mean and population std of successful cells per (mode, use_cc, use_gc, rate)"""
    ok = cells[cells['status'] == 'ok']
    if ok.empty:
        return pd.DataFrame(columns=RESULT_COLUMNS)

    keys = ['mode', 'use_cc', 'use_gc', 'rate']
    grouped = ok.groupby(keys, sort=False)[METRICS + ['consensus']]
    means = grouped.mean()
    stds = grouped.std(ddof=0)[METRICS].add_suffix('_std')
    aggregate = means.join(stds).reset_index()
    aggregate['row_type'] = 'aggregate'
    aggregate['dataset'] = cells['dataset'].iloc[0]
    aggregate['status'] = 'ok'
    aggregate['error'] = ''
    return aggregate.reindex(columns=RESULT_COLUMNS)


def results_table(results: pd.DataFrame) -> pd.DataFrame:
    """Wide table: one row per (mode, metric), one column per missing rate, 'mean±std' in percent"""
    aggregate = results[results['row_type'] == 'aggregate']
    records = []
    for _, row in aggregate.iterrows():
        for metric in METRICS:
            records.append({
                'mode': row['mode'],
                'metric': metric.upper(),
                'rate': row['rate'],
                'value': f"{row[metric] * 100:.2f}±{row[metric + '_std'] * 100:.2f}",
            })
    if not records:
        return pd.DataFrame()
    long = pd.DataFrame(records)
    return long.pivot(index=['mode', 'metric'], columns='rate', values='value')
