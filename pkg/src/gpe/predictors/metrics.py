from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gpe.errors import DegenerateVariance, LengthMismatch, ZeroActual


@dataclass(frozen=True)
class Metrics:
    mape: float
    r2: float
    n: int

    def to_json(self) -> dict:
        return {"mape": self.mape, "r2": self.r2, "n": self.n}


def _pair(actual, predicted, min_len):
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape or a.ndim != 1:
        raise LengthMismatch(f"actual has {a.size} values, predicted has {p.size}")
    if a.size < min_len:
        raise LengthMismatch(f"need at least {min_len} values, got {a.size}")
    return a, p


def mape(actual, predicted) -> float:
    """Mean absolute percentage error, in percent."""
    a, p = _pair(actual, predicted, 1)
    if np.any(a == 0):
        raise ZeroActual("MAPE is undefined for zero actual values")
    return float(100.0 * np.mean(np.abs(a - p) / np.abs(a)))


def r2(actual, predicted) -> float:
    a, p = _pair(actual, predicted, 2)
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0:
        raise DegenerateVariance("R2 is undefined when all actual values are identical")
    return 1.0 - float(np.sum((a - p) ** 2)) / ss_tot


def metrics(actual, predicted) -> Metrics:
    return Metrics(mape(actual, predicted), r2(actual, predicted), len(actual))
