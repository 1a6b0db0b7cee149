import numpy as np

from gpe.predictors import Dataset, Stopping, fit_forest, fit_tree
from gpe.predictors.rng import XorShift64Star


def toy(seed=0, n=80):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 10, size=(n, 5))
    y = 3 * X[:, 0] + X[:, 1] ** 2 + rng.normal(size=n)
    return Dataset([f"f{i}" for i in range(5)], X, y)


def test_rng_reference_values():
    r = XorShift64Star(1)
    first = [r.next_u64() for _ in range(3)]
    assert first == [XorShift64Star(1).next_u64(), *first[1:]]
    assert len(set(first)) == 3
    assert all(0 <= XorShift64Star(s).below(7) < 7 for s in range(50))
    assert XorShift64Star(0).state != 0


def test_degenerate_forest_equals_tree():
    d = toy()
    stop = Stopping(8, 2)
    f = fit_forest(d, trees=1, seed=3, stopping=stop, features_per_split=5, bootstrap=False)
    t = fit_tree(d, stop)
    assert np.array_equal(f.predict(d.X), t.predict(d.X))


def test_same_seed_same_predictions():
    d = toy()
    probe = np.random.default_rng(9).uniform(0, 10, size=(30, 5))
    a = fit_forest(d, trees=10, seed=42).predict(probe)
    b = fit_forest(d, trees=10, seed=42).predict(probe)
    c = fit_forest(d, trees=10, seed=43).predict(probe)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_parallel_equals_sequential():
    d = toy()
    a = fit_forest(d, trees=8, seed=5, threads=1)
    b = fit_forest(d, trees=8, seed=5, threads=4)
    assert all(np.array_equal(x.threshold, y.threshold) for x, y in zip(a.trees, b.trees))


def test_prediction_within_tree_range():
    d = toy()
    f = fit_forest(d, trees=12, seed=1)
    probe = np.random.default_rng(2).uniform(-5, 15, size=(50, 5))
    per_tree = f.tree_predictions(probe)
    pred = f.predict(probe)
    assert (pred >= per_tree.min(axis=0) - 1e-12).all() and (pred <= per_tree.max(axis=0) + 1e-12).all()


def test_default_features_per_split():
    f = fit_forest(toy(), trees=1, seed=0)
    assert f.features_per_split == 3
