import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpe.errors import EmptyDataset
from gpe.predictors import Dataset, Stopping, fit_tree

ONE_D = Dataset(["x"], [[1], [2], [3], [4]], [0, 0, 10, 10])


def test_constant_targets_single_leaf():
    t = fit_tree(Dataset(["x"], [[1], [2], [3]], [7, 7, 7]))
    assert t.n_leaves == 1 and t.predict([[100]])[0] == 7


def test_one_d_split_at_midpoint():
    t = fit_tree(ONE_D, Stopping(max_depth=3, min_samples_leaf=1))
    assert t.feature[0] == 0 and t.threshold[0] == 2.5
    assert list(t.predict(ONE_D.X)) == [0, 0, 10, 10]


def test_boundary_goes_left():
    t = fit_tree(ONE_D, Stopping(max_depth=1, min_samples_leaf=1))
    assert t.predict([[2.5]])[0] == 0


def test_depth_zero_is_global_mean():
    t = fit_tree(ONE_D, Stopping(max_depth=0))
    assert t.n_leaves == 1 and t.predict([[1]])[0] == 5


def test_first_feature_wins_ties():
    # both columns separate the targets perfectly
    d = Dataset(["a", "b"], [[1, 10], [2, 20], [3, 30], [4, 40]], [0, 0, 1, 1])
    t = fit_tree(d, Stopping(max_depth=1, min_samples_leaf=1))
    assert t.feature[0] == 0


def test_empty_dataset():
    with pytest.raises(EmptyDataset):
        fit_tree(Dataset(["a"], np.zeros((0, 1)), []))


def test_min_samples_leaf_respected():
    rng = np.random.default_rng(1)
    d = Dataset(["a", "b"], rng.normal(size=(60, 2)), rng.normal(size=60))
    t = fit_tree(d, Stopping(max_depth=10, min_samples_leaf=5))
    leaves = t.apply(d.X)
    assert np.bincount(leaves).max() >= 5
    assert all(c >= 5 for c in np.bincount(leaves) if c)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(5, 60))
def test_leaf_values_are_training_means(seed, n):
    rng = np.random.default_rng(seed)
    d = Dataset(["a", "b", "c"], rng.integers(0, 5, size=(n, 3)), rng.normal(size=n))
    t = fit_tree(d, Stopping(max_depth=6, min_samples_leaf=2))
    leaves = t.apply(d.X)
    for leaf in np.unique(leaves):
        assert t.value[leaf] == pytest.approx(d.y[leaves == leaf].mean(), rel=1e-12, abs=1e-12)
    probe = rng.integers(-1, 6, size=(200, 3))
    assert len(np.unique(t.predict(probe))) <= t.n_leaves
