import numpy as np
import pytest

from gpe.errors import InputError, SchemaMismatch
from gpe.predictors import (
    Dataset,
    ModelSpec,
    cross_val_predict,
    fold_indices,
    kfold_cv,
    load_model,
    parse_dataset,
    save_model,
    select_best,
    train,
)
from gpe.errors import BadFolds


def toy(n=60, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(1, 10, size=(n, 3))
    y = 5 + 2 * X[:, 0] + X[:, 1] * X[:, 2] + rng.normal(scale=0.1, size=n)
    return Dataset(["a", "b", "c"], X, y, "power_w")


@pytest.mark.parametrize("spec", ["knn:k=3", "tree:maxDepth=5", "forest:trees=5", "mean",
                                  "forest:trees=3,logTarget=true"])
def test_save_load_bit_identical(tmp_path, spec):
    d = toy()
    m = train(d, ModelSpec.parse(spec), seed=4)
    path = tmp_path / "m.json"
    save_model(m, path)
    again = load_model(path)
    probe = np.random.default_rng(1).uniform(0, 11, size=(25, 3))
    assert np.array_equal(m.predict(probe), again.predict(probe))
    assert again.dumps() == m.dumps()


def test_model_file_fields():
    m = train(toy(), ModelSpec.parse("forest:trees=2"), seed=9)
    data = m.to_json()
    assert set(data) == {"kind", "schemaVersion", "hyperparameters", "seed", "payload"}
    assert data["seed"] == 9 and data["hyperparameters"]["trees"] == 2


def test_spec_parsing():
    s = ModelSpec.parse("forest:trees=7,depth=3")
    assert s.hyper["trees"] == 7 and s.hyper["maxDepth"] == 3
    assert ModelSpec.parse(str(s)) == s
    with pytest.raises(InputError):
        ModelSpec.parse("svm")
    with pytest.raises(InputError):
        ModelSpec.parse("knn:trees=3")


def test_schema_check():
    m = train(toy(), ModelSpec.parse("tree"))
    other = Dataset(["a", "c", "b"], np.zeros((1, 3)), [1.0])
    with pytest.raises(SchemaMismatch):
        m.predict_dataset(other)


def test_dataset_csv_round_trip():
    d = toy(5)
    back = parse_dataset(d.to_csv())
    assert back.feature_names == d.feature_names and back.target_name == "power_w"
    assert np.array_equal(back.X, d.X) and np.array_equal(back.y, d.y)
    with pytest.raises(SchemaMismatch):
        parse_dataset("a,b,target\n1,2\n")


def test_folds():
    folds = fold_indices(10, 3, 1)
    assert sorted(np.concatenate(folds).tolist()) == list(range(10))
    assert sorted(len(f) for f in folds) == [3, 3, 4]
    with pytest.raises(BadFolds):
        fold_indices(5, 1, 0)
    with pytest.raises(BadFolds):
        fold_indices(5, 6, 0)


def test_leave_one_out_runs_n_fits(monkeypatch):
    import gpe.predictors.evaluate as ev

    calls = []
    real = ev.train
    monkeypatch.setattr(ev, "train", lambda *a, **k: calls.append(1) or real(*a, **k))
    d = toy(8)
    cross_val_predict(d, ModelSpec.parse("mean"), folds=8, seed=0)
    assert len(calls) == 8


def test_cv_deterministic_and_selection():
    d = toy()
    specs = [ModelSpec.parse("mean"), ModelSpec.parse("forest:trees=10")]
    assert kfold_cv(d, specs[1], 5, 7) == kfold_cv(d, specs[1], 5, 7)
    best, metrics, results = select_best(d, specs, 5, 7)
    assert best.kind == "forest" and len(results) == 2
    only, _, _ = select_best(d, specs[:1], 5, 7)
    assert only == specs[0]


def test_select_best_tie_keeps_first():
    d = toy()
    a, b = ModelSpec.parse("mean"), ModelSpec.make("mean")
    best, _, _ = select_best(d, [a, b], 4, 0)
    assert best is a
