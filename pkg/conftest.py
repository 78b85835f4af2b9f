# conftest.py - Shared fixtures for the test suite
import sys
from pathlib import Path

import numpy as np
import pytest
import torch

sys.path.insert(0, str(Path(__file__).parent))

from core.hyperparams import ArchitectureConfig, TrainConfig  # noqa: E402
from core.models import MultiViewDataset  # noqa: E402
from nets.model import ModelSpec, init_params  # noqa: E402

TINY_ARCHITECTURE = ArchitectureConfig(hidden_dims=[5], latent_dim=4, gcn_dims=[3, 4], dtype="float64")


def tiny_config(**updates) -> TrainConfig:
    """Small, fast, float64 training setup"""
    base = TrainConfig(warmup_epochs=2, finetune_epochs=2, batch_size=8, kmeans_n_init=2,
                       architecture=TINY_ARCHITECTURE)
    return base.model_copy(update=updates)


def blob_views(n: int = 12, k: int = 2, dims=(3, 3), seed: int = 0):
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % k
    views = [rng.random((k, d))[labels] * 4 + rng.normal(scale=0.1, size=(n, d)) for d in dims]
    return views, labels


@pytest.fixture(autouse=True)
def _single_thread():
    torch.set_num_threads(1)


@pytest.fixture
def toy_dataset() -> MultiViewDataset:
    """2 views, N=12, K=2, one instance missing in each view"""
    views, labels = blob_views()
    mask = np.ones((12, 2), dtype=bool)
    mask[3, 0] = False
    mask[8, 1] = False
    return MultiViewDataset(views=views, mask=mask, n_clusters=2, labels=labels, name="toy")


@pytest.fixture
def tiny_state(toy_dataset):
    spec = ModelSpec.from_config(toy_dataset.dims, toy_dataset.n_clusters, TINY_ARCHITECTURE)
    return init_params(spec, seed=0)
