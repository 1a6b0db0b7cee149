from __future__ import annotations

import numpy as np

from gpe.errors import BadFolds, InputError
from gpe.predictors.dataset import Dataset
from gpe.predictors.metrics import Metrics, metrics
from gpe.predictors.model import ModelSpec, train
from gpe.predictors.rng import XorShift64Star


def fold_indices(n: int, folds: int, seed: int) -> list:
    """Seeded shuffle, then contiguous folds (sizes differ by at most one)."""
    if not 2 <= folds <= n:
        raise BadFolds(f"folds={folds} must lie in [2, {n}]")
    order = XorShift64Star(seed).shuffle(list(range(n)))
    return [np.array(chunk, dtype=np.int64) for chunk in np.array_split(order, folds)]


def cross_val_predict(data: Dataset, spec: ModelSpec, folds: int = 5, seed: int = 0,
                      threads: int = 0) -> np.ndarray:
    data.require_rows()
    pooled = np.empty(len(data))
    n = len(data)
    for test in fold_indices(n, folds, seed):
        mask = np.ones(n, dtype=bool)
        mask[test] = False
        model = train(data.subset(mask), spec, seed, threads)
        pooled[test] = model.predict(data.X[test])
    return pooled


def kfold_cv(data: Dataset, spec: ModelSpec, folds: int = 5, seed: int = 0,
             threads: int = 0) -> Metrics:
    """Out-of-fold predictions pooled over all folds, scored once."""
    return metrics(data.y, cross_val_predict(data, spec, folds, seed, threads))


def select_best(data: Dataset, candidates, folds: int = 5, seed: int = 0, threads: int = 0):
    """Lowest cross-validated MAPE wins; earlier candidates win ties."""
    candidates = list(candidates)
    if not candidates:
        raise InputError("select_best needs at least one candidate")
    best = None
    results = []
    for spec in candidates:
        m = kfold_cv(data, spec, folds, seed, threads)
        results.append((spec, m))
        if best is None or m.mape < best[1].mape:
            best = (spec, m)
    return best[0], best[1], results
