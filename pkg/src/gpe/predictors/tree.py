"""CART regression trees grown by greedy SSE reduction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gpe.errors import SchemaMismatch
from gpe.predictors.dataset import Dataset


@dataclass(frozen=True)
class Stopping:
    max_depth: int = 16
    min_samples_leaf: int = 2

    def __post_init__(self):
        if self.max_depth < 0 or self.min_samples_leaf < 1:
            raise ValueError("max_depth must be >= 0 and min_samples_leaf >= 1")


@dataclass
class DecisionTree:
    """Flat node arrays; ``feature[i] == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features: int

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise SchemaMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                return node
            r, n = rows[active], node[active]
            go_left = X[r, f[active]] <= self.threshold[n]
            node[active] = np.where(go_left, self.left[n], self.right[n])

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def payload(self) -> dict:
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(),
                "value": self.value.tolist(), "nFeatures": self.n_features}

    @classmethod
    def from_payload(cls, p: dict) -> "DecisionTree":
        return cls(np.array(p["feature"], dtype=np.int64), np.array(p["threshold"], dtype=float),
                   np.array(p["left"], dtype=np.int64), np.array(p["right"], dtype=np.int64),
                   np.array(p["value"], dtype=float), int(p["nFeatures"]))


def best_split(X, y, features, min_leaf):
    """(gain, feature, threshold) of the best split, or None.

    Candidates are scanned in the given order and a later one must beat the
    incumbent strictly, so the earliest feature and lowest threshold win ties.
    """
    features = list(features)
    n = y.size
    if not features or n < 2:
        return None
    yc = y - y.mean()
    parent = float(yc @ yc)
    tol = 1e-12 * max(parent, 1e-300)
    cols = X[:, features]
    order = np.argsort(cols, axis=0, kind="stable")
    xs = np.take_along_axis(cols, order, axis=0)
    ys = yc[order]
    csum = np.cumsum(ys, axis=0)[:-1]
    csq = np.cumsum(ys * ys, axis=0)[:-1]
    counts = np.arange(1, n, dtype=float)[:, None]
    total = ys.sum(axis=0)
    total_sq = (ys * ys).sum(axis=0)
    rsum = total - csum
    gain = parent - (csq - csum * csum / counts) - ((total_sq - csq) - rsum * rsum / (n - counts))
    sizes = np.arange(1, n)
    size_ok = (sizes >= min_leaf) & (n - sizes >= min_leaf)
    valid = (xs[1:] > xs[:-1]) & size_ok[:, None]
    gain = np.where(valid, gain, -np.inf)
    pos = np.argmax(gain, axis=0)  # first maximum = lowest threshold
    peak = gain[pos, np.arange(len(features))]
    best = None
    for j, f in enumerate(features):
        g = float(peak[j])
        if g > tol and (best is None or g > best[0] + tol):
            i = int(pos[j])
            best = (g, int(f), float((xs[i, j] + xs[i + 1, j]) / 2.0))
    return best


def _candidates(Xn, rng, mtry):
    """``mtry`` random features that are not constant on this node, ascending."""
    usable = np.flatnonzero(Xn.min(axis=0) < Xn.max(axis=0))
    if usable.size <= mtry:
        return usable.tolist()
    return sorted(int(usable[i]) for i in rng.sample(usable.size, mtry))


def grow_tree(X, y, stopping: Stopping = Stopping(), rng=None, mtry: int = 0) -> DecisionTree:
    """Grow a tree on all features, or on ``mtry`` random ones per node when ``rng`` is given.

    Features constant on a node cannot split it, so random draws skip them.
    """
    d = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        for arr, v in ((feature, -1), (threshold, 0.0), (left, -1), (right, -1), (value, 0.0)):
            arr.append(v)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(y.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        ys = y[idx]
        value[node] = float(ys.mean())
        if (depth >= stopping.max_depth or idx.size < 2 * stopping.min_samples_leaf
                or ys.min() == ys.max()):
            continue
        Xn = X[idx]
        if rng is not None and mtry < d:
            candidates = _candidates(Xn, rng, mtry)
        else:
            candidates = range(d)
        split = best_split(Xn, ys, candidates, stopping.min_samples_leaf)
        if split is None:
            continue
        _, f, t = split
        mask = X[idx, f] <= t
        lnode, rnode = new_node(), new_node()
        feature[node], threshold[node], left[node], right[node] = f, t, lnode, rnode
        # push right first so the left subtree gets lower node ids
        stack.append((rnode, idx[~mask], depth + 1))
        stack.append((lnode, idx[mask], depth + 1))
    return DecisionTree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=float),
                        np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                        np.array(value, dtype=float), d)


def fit_tree(data: Dataset, stopping: Stopping = Stopping()) -> DecisionTree:
    data.require_rows()
    return grow_tree(data.X, data.y, stopping)
