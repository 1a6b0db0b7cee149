from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from gpe.predictors.dataset import Dataset
from gpe.predictors.rng import XorShift64Star, splitmix64
from gpe.predictors.tree import DecisionTree, Stopping, grow_tree


@dataclass
class RandomForest:
    trees: list
    seed: int
    features_per_split: int
    bootstrap: bool = True

    def tree_predictions(self, X) -> np.ndarray:
        return np.stack([t.predict(X) for t in self.trees])

    def predict(self, X) -> np.ndarray:
        return self.tree_predictions(X).mean(axis=0)


def tree_seed(seed: int, index: int) -> int:
    """Independent stream per tree so parallel and sequential fits agree."""
    return splitmix64((seed + index) & ((1 << 64) - 1))


def _fit_one(X, y, seed, index, stopping, mtry, bootstrap) -> DecisionTree:
    rng = XorShift64Star(tree_seed(seed, index))
    n = X.shape[0]
    if bootstrap:
        idx = np.fromiter((rng.below(n) for _ in range(n)), dtype=np.int64, count=n)
        X, y = X[idx], y[idx]
    return grow_tree(X, y, stopping, rng, mtry)


def fit_forest(data: Dataset, trees: int = 100, seed: int = 0, stopping: Stopping = Stopping(),
               features_per_split: int = 0, bootstrap: bool = True, threads: int = 0) -> RandomForest:
    """Bagged CART ensemble; ``features_per_split=0`` means ceil(sqrt(d))."""
    data.require_rows()
    if trees < 1:
        raise ValueError("trees must be >= 1")
    d = data.X.shape[1]
    mtry = features_per_split or max(1, math.ceil(math.sqrt(d)))
    mtry = min(mtry, d)
    workers = threads or os.cpu_count() or 1
    args = [(data.X, data.y, seed, i, stopping, mtry, bootstrap) for i in range(trees)]
    if workers == 1 or trees == 1:
        fitted = [_fit_one(*a) for a in args]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, trees)) as pool:
            fitted = list(pool.map(lambda a: _fit_one(*a), args))
    return RandomForest(fitted, seed, mtry, bootstrap)
