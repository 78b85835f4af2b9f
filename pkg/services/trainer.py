# services/trainer.py - Reconstruction warm-up, joint fine-tuning and prediction
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import torch
from tqdm import tqdm

from clustering.consensus import total_cc_loss
from clustering.fusion import anchor_rows, completeness_weights, consensus_prototypes, fuse, per_view_prototypes
from clustering.graph import build_view_graphs, t_dist_labels, total_gc_loss
from clustering.kmeans import kmeans
from core.errors import TrainingDivergedError
from core.hyperparams import TrainConfig
from core.models import EpochReport, MultiViewDataset, PrototypeSet, TrainingStage, ViewGraph
from nets.autograd import apply_gradients, backward
from nets.model import ModelState, decode, encode, represent
from utils.metrics import evaluate

logger = logging.getLogger(__name__)

EpochCallback = Callable[[EpochReport], None]

STAGE_STREAMS = {TrainingStage.WARMUP: 0, TrainingStage.FINETUNE: 1}


@dataclass
class LossBreakdown:
    """Overall loss and its components; disabled components are exact zeros"""
    total: torch.Tensor
    rec: torch.Tensor
    cc: torch.Tensor
    gc: torch.Tensor

    def components(self) -> Dict[str, float]:
        return {'rec': self.rec.item(), 'cc': self.cc.item(), 'gc': self.gc.item()}


@dataclass
class EpochArtifacts:
    """Per-epoch constants: consensus/per-view prototypes and Student's-t labels"""
    prototypes: Optional[PrototypeSet] = None
    labels: Optional[List[torch.Tensor]] = None


def iterate_batches(n: int, batch_size: int, rng: np.random.Generator) -> List[np.ndarray]:
    """Shuffle without replacement and split into consecutive batches"""
    order = rng.permutation(n)
    return [order[start:start + batch_size] for start in range(0, n, batch_size)]


def batch_stream(config: TrainConfig, stage: TrainingStage) -> np.random.Generator:
    return np.random.default_rng([config.seed, STAGE_STREAMS[stage]])


# ============================================================================
# LOSSES
# ============================================================================

def reconstruction_loss(state: ModelState, dataset: MultiViewDataset, batch: np.ndarray) -> torch.Tensor:
    """
    Squared reconstruction errors summed over the observed (instance, view) pairs
    of the batch, divided by the batch size.

    The divisor counts instances, not observations, so masking an observation
    only ever removes a nonnegative term.
    """
    batch = np.asarray(batch, dtype=np.int64)
    total = torch.zeros((), dtype=state.dtype)
    for v in range(dataset.n_views):
        rows = batch[dataset.mask[batch, v]]
        if rows.size == 0:
            continue
        x = torch.as_tensor(dataset.views[v][rows], dtype=state.dtype)
        residual = x - decode(encode(x, v, state), v, state)
        total = total + (residual ** 2).sum()
    return total / max(batch.size, 1)


def overall_loss(state: ModelState, dataset: MultiViewDataset, batch: np.ndarray,
                 prototypes: Optional[PrototypeSet], graphs: Optional[List[ViewGraph]],
                 labels: Optional[List[torch.Tensor]], config: TrainConfig,
                 include_gc: bool = True) -> LossBreakdown:
    """
    L = L_rec + L_cc + L_gc, unweighted.

    Terms switched off by use_cc / use_gc are neither computed nor differentiated.
    `include_gc=False` skips the full-graph term for batches after the first.
    """
    zero = torch.zeros((), dtype=state.dtype)
    rec = reconstruction_loss(state, dataset, batch)
    cc = total_cc_loss(state, dataset, prototypes, batch, config.csl) if config.use_cc else zero
    gc = total_gc_loss(state, dataset, graphs, labels, config.cse) if config.use_gc and include_gc else zero
    return LossBreakdown(total=rec + cc + gc, rec=rec, cc=cc, gc=gc)


def _check_finite(breakdown: LossBreakdown, stage: TrainingStage, epoch: int, reports: List[EpochReport]):
    for name, value in breakdown.components().items():
        if not math.isfinite(value):
            raise TrainingDivergedError(
                f"{stage.value} epoch {epoch}: loss component '{name}' is {value}",
                component=name,
                reports=list(reports),
            )


def _snapshot(state: ModelState, dataset: MultiViewDataset, config: TrainConfig) -> Optional[Dict[str, float]]:
    if dataset.labels is None:
        return None
    pred = predict(state, dataset, dataset.n_clusters, seed=config.seed, n_init=config.kmeans_n_init)
    report = evaluate(pred, dataset.labels, dataset.n_clusters)
    return {'acc': report.acc, 'nmi': report.nmi, 'ari': report.ari}


# ============================================================================
# STAGES
# ============================================================================

def warmup(state: ModelState, dataset: MultiViewDataset, config: TrainConfig,
           on_epoch: Optional[EpochCallback] = None, progress: bool = False,
           reports: Optional[List[EpochReport]] = None) -> ModelState:
    """
    Mini-batch Adam on the reconstruction loss only.

    One EpochReport per epoch goes to `on_epoch` and is appended to `reports`.
    """
    reports = reports if reports is not None else []
    if config.warmup_epochs == 0:
        return state

    optimizer = torch.optim.Adam(state.parameters(), lr=config.lr_warmup)
    rng = batch_stream(config, TrainingStage.WARMUP)

    for epoch in tqdm(range(config.warmup_epochs), desc="warm-up", disable=not progress):
        started = time.perf_counter()
        rec_total = 0.0
        for batch in iterate_batches(dataset.n_instances, config.batch_size, rng):
            rec = reconstruction_loss(state, dataset, batch)
            zero = torch.zeros((), dtype=state.dtype)
            _check_finite(LossBreakdown(rec, rec, zero, zero), TrainingStage.WARMUP, epoch, reports)
            apply_gradients(backward(rec, state), state, optimizer)
            rec_total += rec.item()

        report = EpochReport(stage=TrainingStage.WARMUP.value, epoch=epoch, rec=rec_total,
                             total=rec_total, wall_time=time.perf_counter() - started)
        reports.append(report)
        if on_epoch:
            on_epoch(report)
    return state


def prepare_epoch(state: ModelState, dataset: MultiViewDataset, config: TrainConfig,
                  epoch: int) -> EpochArtifacts:
    """
    Rebuild consensus prototypes and Student's-t labels from the current state.

    Prototypes are fitted on the fused rows of complete instances only (see
    anchor_rows); per-view prototypes use every observed row of their view.
    """
    artifacts = EpochArtifacts()
    if not (config.use_cc or config.use_gc):
        return artifacts

    reps = represent(state, dataset)
    seed = config.seed + epoch

    if config.use_cc:
        family = reps.semantic if config.csl.prototype_space == "semantic" else reps.latent
        fused = fuse(family, completeness_weights(dataset.mask))
        anchors = anchor_rows(dataset.mask, dataset.n_clusters)
        artifacts.prototypes = consensus_prototypes(fused[anchors], dataset.n_clusters, seed=seed,
                                                    n_init=config.kmeans_n_init)

    if config.use_gc:
        observed = [reps.observed_semantic(v, dataset.mask) for v in range(dataset.n_views)]
        per_view = per_view_prototypes(observed, dataset.n_clusters, seed=seed, n_init=config.kmeans_n_init)
        artifacts.labels = [t_dist_labels(h, c, config.cse.t_dof) for h, c in zip(observed, per_view)]
        if artifacts.prototypes is not None:
            artifacts.prototypes.per_view = per_view

    return artifacts


def finetune(state: ModelState, dataset: MultiViewDataset, config: TrainConfig,
             on_epoch: Optional[EpochCallback] = None, progress: bool = False,
             eval_every: int = 0, reports: Optional[List[EpochReport]] = None
             ) -> Tuple[ModelState, List[EpochReport]]:
    """
    Joint optimization of reconstruction, consensus and graph losses.

    Graphs are built once from the observed rows of `dataset` (expected to be
    normalized). Every epoch re-encodes all observed rows, rebuilds prototypes and
    self-labels, then runs shuffled mini-batches; the full-graph term is added to
    the first batch only. With `eval_every > 0` and ground truth available, a
    metrics snapshot is attached every `eval_every` epochs.
    """
    reports = reports if reports is not None else []
    stage_reports: List[EpochReport] = []
    if config.finetune_epochs == 0:
        return state, stage_reports

    graphs = build_view_graphs(dataset, config.cse.neighbors) if config.use_gc else None
    optimizer = torch.optim.Adam(state.parameters(), lr=config.lr_finetune)
    rng = batch_stream(config, TrainingStage.FINETUNE)

    for epoch in tqdm(range(config.finetune_epochs), desc="fine-tune", disable=not progress):
        started = time.perf_counter()
        artifacts = prepare_epoch(state, dataset, config, epoch)

        sums = {'rec': 0.0, 'cc': 0.0, 'gc': 0.0}
        batches = iterate_batches(dataset.n_instances, config.batch_size, rng)
        for index, batch in enumerate(batches):
            breakdown = overall_loss(state, dataset, batch, artifacts.prototypes, graphs,
                                     artifacts.labels, config, include_gc=index == 0)
            _check_finite(breakdown, TrainingStage.FINETUNE, epoch, reports)
            apply_gradients(backward(breakdown.total, state), state, optimizer)
            for name, value in breakdown.components().items():
                sums[name] += value

        metrics = None
        if eval_every > 0 and (epoch + 1) % eval_every == 0:
            metrics = _snapshot(state, dataset, config)

        report = EpochReport(
            stage=TrainingStage.FINETUNE.value, epoch=epoch,
            rec=sums['rec'], cc=sums['cc'], gc=sums['gc'],
            total=sums['rec'] + sums['cc'] + sums['gc'],
            wall_time=time.perf_counter() - started, metrics=metrics,
        )
        reports.append(report)
        stage_reports.append(report)
        if on_epoch:
            on_epoch(report)
        logger.debug("fine-tune epoch %d: %s", epoch, report.to_dict())

    return state, stage_reports


# ============================================================================
# PREDICTION
# ============================================================================

def consensus_semantics(state: ModelState, dataset: MultiViewDataset) -> np.ndarray:
    """Completeness-weighted consensus H over all N instances"""
    reps = represent(state, dataset)
    return fuse(reps.semantic, completeness_weights(dataset.mask))


def predict(state: ModelState, dataset: MultiViewDataset, k: int, seed: int = 0,
            n_init: int = 10) -> np.ndarray:
    """k-means on the consensus semantic representation; one label per instance"""
    _, labels = kmeans(consensus_semantics(state, dataset), k, seed=seed, n_init=n_init)
    return labels
