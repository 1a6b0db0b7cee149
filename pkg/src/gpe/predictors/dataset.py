"""Tabular training data: feature columns then one target column."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gpe import SCHEMA_VERSION
from gpe.errors import EmptyDataset, InputError, SchemaMismatch

TARGET_NAMES = ("power_w", "cycles")


@dataclass
class Dataset:
    feature_names: tuple
    X: np.ndarray
    y: np.ndarray
    target_name: str = "power_w"
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        self.feature_names = tuple(self.feature_names)
        self.X = np.asarray(self.X, dtype=float).reshape(-1, len(self.feature_names))
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        if self.X.shape[0] != self.y.shape[0]:
            raise SchemaMismatch(f"{self.X.shape[0]} feature rows but {self.y.shape[0]} targets")

    def __len__(self):
        return self.y.shape[0]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.feature_names, self.X[idx], self.y[idx], self.target_name,
                       self.schema_version)

    def require_rows(self):
        if len(self) == 0:
            raise EmptyDataset("dataset has no rows")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(self.feature_names) + [self.target_name])
        for row, target in zip(self.X, self.y):
            writer.writerow([_num(v) for v in row] + [_num(target)])
        return buf.getvalue()


def _num(v) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)


def read_table(text: str, source: str = "<csv>"):
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if not rows:
        raise EmptyDataset(f"{source}: no header")
    header = tuple(h.strip() for h in rows[0])
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise SchemaMismatch(f"{source} row {lineno}: {len(row)} fields, header has {len(header)}")
        try:
            values.append([float(v) for v in row])
        except ValueError as exc:
            raise InputError(f"{source} row {lineno}: {exc}") from None
    return header, np.array(values, dtype=float).reshape(-1, len(header))


def parse_dataset(text: str, source: str = "<csv>") -> Dataset:
    header, table = read_table(text, source)
    if len(header) < 2:
        raise SchemaMismatch(f"{source}: need at least one feature and a target column")
    return Dataset(header[:-1], table[:, :-1], table[:, -1], header[-1])


def load_dataset(path) -> Dataset:
    return parse_dataset(Path(path).read_text(encoding="utf-8"), str(path))
