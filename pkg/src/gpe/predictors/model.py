"""Trained model wrapper, JSON model files and model specs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gpe import SCHEMA_VERSION
from gpe.errors import InputError, SchemaMismatch
from gpe.predictors.dataset import Dataset
from gpe.predictors.forest import RandomForest, fit_forest
from gpe.predictors.knn import KnnModel, fit_knn
from gpe.predictors.tree import DecisionTree, Stopping, fit_tree

KINDS = ("knn", "tree", "forest", "mean")
DEFAULTS = {
    "knn": {"k": 5},
    "tree": {"maxDepth": 16, "minSamplesLeaf": 2},
    "forest": {"trees": 100, "maxDepth": 16, "minSamplesLeaf": 2, "featuresPerSplit": 0,
               "bootstrap": True},
    "mean": {},
}
_ALIASES = {"depth": "maxDepth", "min_leaf": "minSamplesLeaf", "minleaf": "minSamplesLeaf",
            "mtry": "featuresPerSplit", "features": "featuresPerSplit"}


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: tuple = ()  # sorted (name, value) pairs over DEFAULTS[kind]
    log_target: bool = False

    @classmethod
    def make(cls, kind: str, log_target: bool = False, **overrides) -> "ModelSpec":
        if kind not in KINDS:
            raise InputError(f"unknown model kind {kind!r}; choose from {', '.join(KINDS)}")
        params = dict(DEFAULTS[kind])
        for key, value in overrides.items():
            key = _ALIASES.get(key, key)
            if key not in params:
                raise InputError(f"model {kind} has no hyperparameter {key!r}")
            params[key] = type(params[key])(value) if not isinstance(params[key], bool) else \
                str(value).lower() in ("1", "true", "yes")
        return cls(kind, tuple(sorted(params.items())), log_target)

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        """``kind[:name=value,...]``, e.g. ``forest:trees=50,maxDepth=8``."""
        kind, _, rest = text.partition(":")
        overrides = {}
        log_target = False
        for item in filter(None, rest.split(",")):
            key, sep, value = item.partition("=")
            if not sep:
                raise InputError(f"bad model spec item {item!r}; expected name=value")
            if key == "logTarget":
                log_target = value.lower() in ("1", "true", "yes")
            else:
                overrides[key] = value
        return cls.make(kind.strip(), log_target, **overrides)

    @property
    def hyper(self) -> dict:
        return dict(self.params)

    def __str__(self):
        items = [f"{k}={v}" for k, v in self.params]
        if self.log_target:
            items.append("logTarget=true")
        return self.kind + (":" + ",".join(items) if items else "")


@dataclass
class TrainedModel:
    spec: ModelSpec
    feature_names: tuple
    target_name: str
    impl: object
    seed: int = 0
    schema_version: str = SCHEMA_VERSION
    meta: dict = field(default_factory=dict)

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.feature_names):
            raise SchemaMismatch(f"model expects {len(self.feature_names)} features, got {X.shape[1]}")
        if self.spec.kind == "mean":
            out = np.full(X.shape[0], self.impl)
        else:
            out = self.impl.predict(X)
        return np.exp(out) if self.spec.log_target else out

    def predict_dataset(self, data: Dataset) -> np.ndarray:
        check_schema(self, data.feature_names)
        return self.predict(data.X)

    def to_json(self) -> dict:
        kind = self.spec.kind
        if kind == "mean":
            payload = {"value": self.impl}
        elif kind == "forest":
            payload = {"trees": [t.payload() for t in self.impl.trees],
                       "featuresPerSplit": self.impl.features_per_split}
        else:
            payload = self.impl.payload()
        payload["featureNames"] = list(self.feature_names)
        payload["targetName"] = self.target_name
        hyper = self.spec.hyper
        hyper["logTarget"] = self.spec.log_target
        return {"kind": kind, "schemaVersion": self.schema_version, "hyperparameters": hyper,
                "seed": self.seed, "payload": payload}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "TrainedModel":
        try:
            kind = data["kind"]
            hyper = dict(data["hyperparameters"])
            log_target = bool(hyper.pop("logTarget", False))
            spec = ModelSpec.make(kind, log_target, **hyper)
            p = data["payload"]
            if kind == "mean":
                impl = float(p["value"])
            elif kind == "knn":
                impl = KnnModel.from_payload(p)
            elif kind == "tree":
                impl = DecisionTree.from_payload(p)
            else:
                impl = RandomForest([DecisionTree.from_payload(t) for t in p["trees"]],
                                    int(data["seed"]), int(p["featuresPerSplit"]),
                                    bool(spec.hyper["bootstrap"]))
            return cls(spec, tuple(p["featureNames"]), p["targetName"], impl, int(data["seed"]),
                       data["schemaVersion"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed model file: {exc}") from None


def check_schema(model: TrainedModel, feature_names):
    if tuple(feature_names) != tuple(model.feature_names):
        missing = set(model.feature_names) ^ set(feature_names)
        detail = f" (differing: {sorted(missing)[:5]})" if missing else " (order differs)"
        raise SchemaMismatch(f"features do not match the model's schema{detail}")


def save_model(model: TrainedModel, path):
    Path(path).write_text(model.dumps(), encoding="utf-8")


def load_model(path) -> TrainedModel:
    try:
        return TrainedModel.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def train(data: Dataset, spec: ModelSpec, seed: int = 0, threads: int = 0) -> TrainedModel:
    data.require_rows()
    y = data.y
    if spec.log_target:
        if np.any(y <= 0):
            raise InputError("log target needs strictly positive targets")
        y = np.log(y)
    fit_data = Dataset(data.feature_names, data.X, y, data.target_name, data.schema_version)
    h = spec.hyper
    if spec.kind == "mean":
        impl = float(y.mean())
    elif spec.kind == "knn":
        impl = fit_knn(fit_data, h["k"])
    elif spec.kind == "tree":
        impl = fit_tree(fit_data, Stopping(h["maxDepth"], h["minSamplesLeaf"]))
    else:
        impl = fit_forest(fit_data, h["trees"], seed, Stopping(h["maxDepth"], h["minSamplesLeaf"]),
                          h["featuresPerSplit"], h["bootstrap"], threads)
    return TrainedModel(spec, data.feature_names, data.target_name, impl, seed, data.schema_version)
