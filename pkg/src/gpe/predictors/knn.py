from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gpe.errors import BadK, SchemaMismatch
from gpe.predictors.dataset import Dataset


@dataclass
class KnnModel:
    k: int
    mean: np.ndarray
    std: np.ndarray
    samples: np.ndarray  # normalized training rows
    targets: np.ndarray

    def neighbors(self, X) -> np.ndarray:
        """Indices of the k nearest samples per query row; ties go to the lower index."""
        Z = (_as_matrix(X, self.mean.size) - self.mean) / self.std
        out = []
        for start in range(0, Z.shape[0], 256):  # bound the distance matrix size
            chunk = Z[start:start + 256]
            d2 = ((chunk[:, None, :] - self.samples[None, :, :]) ** 2).sum(axis=2)
            out.append(np.argsort(d2, axis=1, kind="stable")[:, : self.k])
        return np.concatenate(out) if out else np.zeros((0, self.k), dtype=int)

    def predict(self, X) -> np.ndarray:
        return self.targets[self.neighbors(X)].mean(axis=1)

    def payload(self) -> dict:
        return {"k": self.k, "mean": self.mean.tolist(), "std": self.std.tolist(),
                "samples": self.samples.tolist(), "targets": self.targets.tolist()}

    @classmethod
    def from_payload(cls, p: dict) -> "KnnModel":
        return cls(int(p["k"]), np.array(p["mean"], dtype=float), np.array(p["std"], dtype=float),
                   np.array(p["samples"], dtype=float).reshape(-1, len(p["mean"])),
                   np.array(p["targets"], dtype=float))


def _as_matrix(X, d):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != d:
        raise SchemaMismatch(f"expected {d} features, got {X.shape[1]}")
    return X


def fit_knn(data: Dataset, k: int = 5) -> KnnModel:
    data.require_rows()
    if not 1 <= k <= len(data):
        raise BadK(f"k={k} must lie in [1, {len(data)}]")
    mean = data.X.mean(axis=0)
    std = data.X.std(axis=0)
    std[std == 0] = 1.0
    return KnnModel(k, mean, std, (data.X - mean) / std, data.y.copy())
