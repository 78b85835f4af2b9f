# test_dataset.py - Loading, masking and normalization
import numpy as np
import pytest

from core.dataset import (
    generate_mask, load_dataset, make_synthetic_dataset, normalize, observed_rows,
    paired_indices, read_mask, save_dataset, write_mask,
)
from core.errors import (
    ContractViolationError, DataValidationError, DatasetFormatError, DatasetLoadError,
    UnsatisfiableMaskError, ViewIndexError,
)
from core.models import MaskSpec, MultiViewDataset


def write_dataset_dir(root, labels=None):
    root.mkdir(parents=True, exist_ok=True)
    (root / "meta").write_text("n=4\nv=2\nk=2\ndims=3,2\n")
    np.savetxt(root / "view_0.csv", np.arange(12, dtype=float).reshape(4, 3), delimiter=",")
    np.savetxt(root / "view_1.csv", np.arange(8, dtype=float).reshape(4, 2), delimiter=",")
    if labels is not None:
        np.savetxt(root / "labels.csv", np.asarray(labels), fmt="%d")
    return root


# ============================================================================
# LOADING
# ============================================================================

def test_load_dataset_shapes(tmp_path):
    dataset = load_dataset(write_dataset_dir(tmp_path / "d", labels=[0, 1, 0, 1]))
    assert dataset.n_instances == 4
    assert dataset.n_views == 2
    assert dataset.dims == [3, 2]
    assert dataset.mask.all()
    assert dataset.labels.tolist() == [0, 1, 0, 1]


def test_load_dataset_missing_view_file_names_it(tmp_path):
    root = write_dataset_dir(tmp_path / "d")
    (root / "view_1.csv").unlink()
    with pytest.raises(DatasetLoadError, match="view_1.csv"):
        load_dataset(root)


def test_load_dataset_label_equal_to_k_rejected(tmp_path):
    root = write_dataset_dir(tmp_path / "d", labels=[0, 1, 2, 0])
    with pytest.raises(DataValidationError):
        load_dataset(root)


def test_load_dataset_ragged_rows(tmp_path):
    root = write_dataset_dir(tmp_path / "d")
    (root / "view_1.csv").write_text("1,2\n3\n4,5\n6,7\n")
    with pytest.raises(DatasetFormatError):
        load_dataset(root)


def test_load_dataset_applies_mask_file(tmp_path):
    root = write_dataset_dir(tmp_path / "d")
    write_mask(np.array([[1, 0], [1, 1], [0, 1], [1, 1]], dtype=bool), root / "mask.csv")
    dataset = load_dataset(root)
    assert np.isnan(dataset.views[1][0]).all()
    assert np.isnan(dataset.views[0][2]).all()
    assert dataset.views[0][0].tolist() == [0.0, 1.0, 2.0]


def test_save_and_load_preserves_content(tmp_path):
    original = make_synthetic_dataset(n=30, n_clusters=3, dims=(4, 5), seed=1)
    mask = generate_mask(30, 2, MaskSpec(missing_rate=0.5, seed=2))
    original = original.with_mask(mask)

    loaded = load_dataset(save_dataset(original, tmp_path / "synthetic"))
    assert np.array_equal(loaded.mask, original.mask)
    assert np.array_equal(loaded.labels, original.labels)
    for a, b in zip(loaded.views, original.views):
        assert np.allclose(a, b, equal_nan=True)


def test_dataset_rejects_unobserved_instance():
    with pytest.raises(DataValidationError):
        MultiViewDataset(views=[np.zeros((2, 1)), np.zeros((2, 1))],
                         mask=np.array([[1, 1], [0, 0]], dtype=bool), n_clusters=1)


def test_dataset_is_read_only(toy_dataset):
    with pytest.raises(ValueError):
        toy_dataset.views[0][0, 0] = 1.0


# ============================================================================
# MASKING
# ============================================================================

def test_generate_mask_zero_rate_is_all_true():
    assert generate_mask(4, 2, MaskSpec(missing_rate=0.0)).all()


def test_generate_mask_half_of_four_instances():
    mask = generate_mask(4, 2, MaskSpec(missing_rate=0.5, seed=7))
    observed = mask.sum(axis=1)
    assert (observed == 1).sum() == 2
    assert (observed == 2).sum() == 2


def test_generate_mask_counts_over_seeds():
    for seed in range(100):
        mask = generate_mask(10, 3, MaskSpec(missing_rate=0.7, seed=seed))
        observed = mask.sum(axis=1)
        assert (observed < 3).sum() == 7
        assert (observed == 3).sum() == 3
        assert (observed >= 1).all()


@pytest.mark.parametrize("n,v,r", [(1, 2, 0.9), (37, 2, 0.3), (200, 6, 0.9), (50, 4, 0.5)])
def test_generate_mask_never_empty_row(n, v, r):
    for seed in range(100):
        mask = generate_mask(n, v, MaskSpec(missing_rate=r, seed=seed))
        assert mask.any(axis=1).all()


def test_generate_mask_is_deterministic():
    spec = MaskSpec(missing_rate=0.5, seed=11)
    assert np.array_equal(generate_mask(50, 3, spec), generate_mask(50, 3, spec))


def test_generate_mask_single_view_unsatisfiable():
    with pytest.raises(UnsatisfiableMaskError):
        generate_mask(5, 1, MaskSpec(missing_rate=0.2))
    assert generate_mask(5, 1, MaskSpec(missing_rate=0.0)).all()


def test_mask_spec_rejects_rate_of_one():
    with pytest.raises(DataValidationError):
        MaskSpec(missing_rate=1.0)


def test_mask_file_round_trip(tmp_path):
    mask = generate_mask(9, 3, MaskSpec(missing_rate=0.5, seed=3))
    assert np.array_equal(read_mask(write_mask(mask, tmp_path / "mask.csv")), mask)


# ============================================================================
# INDICES
# ============================================================================

def test_paired_indices_full_mask():
    assert paired_indices(np.ones((5, 3), dtype=bool), 0, 2).tolist() == list(range(5))


def test_paired_indices_conjunction():
    mask = np.array([[1, 0], [0, 1], [1, 1]], dtype=bool)
    assert paired_indices(mask, 0, 1).tolist() == [2]


def test_paired_indices_disjoint():
    mask = np.array([[1, 0], [0, 1]], dtype=bool)
    assert paired_indices(mask, 0, 1).size == 0


def test_paired_indices_errors():
    mask = np.ones((3, 2), dtype=bool)
    with pytest.raises(ViewIndexError):
        paired_indices(mask, 0, 2)
    with pytest.raises(ContractViolationError):
        paired_indices(mask, 1, 1)


def test_pair_partition_counts():
    mask = generate_mask(40, 3, MaskSpec(missing_rate=0.8, seed=5))
    for m, n in [(0, 1), (0, 2), (1, 2)]:
        both = paired_indices(mask, m, n).size
        exactly_one = int((mask[:, m] ^ mask[:, n]).sum())
        neither = int((~mask[:, m] & ~mask[:, n]).sum())
        assert both + exactly_one + neither == 40


def test_observed_rows():
    assert observed_rows(np.ones((3, 1), dtype=bool), 0).tolist() == [0, 1, 2]
    assert observed_rows(np.array([[1, 0], [1, 0]], dtype=bool), 1).size == 0
    assert observed_rows(np.array([[1], [0], [1]], dtype=bool), 0).tolist() == [0, 2]
    with pytest.raises(ViewIndexError):
        observed_rows(np.ones((3, 1), dtype=bool), 1)


# ============================================================================
# NORMALIZATION
# ============================================================================

def test_normalize_affine_and_constant_columns():
    x = np.array([[0.0, 3.0], [5.0, 3.0], [10.0, 3.0]])
    dataset = normalize(MultiViewDataset(views=[x], mask=np.ones((3, 1), dtype=bool), n_clusters=1))
    assert dataset.views[0][:, 0].tolist() == [0.0, 0.5, 1.0]
    assert dataset.views[0][:, 1].tolist() == [0.0, 0.0, 0.0]


def test_normalize_uses_observed_rows_and_keeps_sentinel():
    x = np.array([[0.0], [100.0], [10.0]])
    y = np.ones((3, 1))
    mask = np.array([[1, 1], [0, 1], [1, 1]], dtype=bool)
    dataset = normalize(MultiViewDataset(views=[x, y], mask=mask, n_clusters=1))
    assert dataset.views[0][0, 0] == 0.0
    assert dataset.views[0][2, 0] == 1.0
    assert np.isnan(dataset.views[0][1]).all()


def test_normalize_is_idempotent():
    dataset = make_synthetic_dataset(n=50, n_clusters=2, dims=(4, 3), seed=4)
    dataset = dataset.with_mask(generate_mask(50, 2, MaskSpec(missing_rate=0.4, seed=4)))
    once = normalize(dataset)
    twice = normalize(once)
    for a, b in zip(once.views, twice.views):
        assert np.array_equal(a, b, equal_nan=True)


# ============================================================================
# SYNTHETIC DATA
# ============================================================================

def test_synthetic_cluster_means_are_separated():
    dataset = make_synthetic_dataset(n=3000, n_clusters=3, dims=(10, 10), separation=6.0, seed=0)
    for x in dataset.views:
        means = np.stack([x[dataset.labels == c].mean(axis=0) for c in range(3)])
        gaps = [np.linalg.norm(means[a] - means[b]) for a in range(3) for b in range(a + 1, 3)]
        assert min(gaps) > 5.5
    assert np.bincount(dataset.labels).tolist() == [1000, 1000, 1000]
