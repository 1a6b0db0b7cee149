"""Launch/analysis configuration and the instruction-mix result type."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import prod
from typing import Optional

from gpe.errors import InputError, Overflow
from gpe.ptx.ast import CATEGORY_ORDER, OpCategory

COUNT_MAX = 2**64 - 1


def _triple(value, name):
    t = tuple(int(v) for v in value)
    if len(t) != 3 or any(v < 1 for v in t):
        raise InputError(f"{name} must be three extents >= 1, got {value}")
    return t


@dataclass(frozen=True)
class LaunchConfig:
    grid: tuple = (1, 1, 1)
    block: tuple = (1, 1, 1)
    param_bindings: dict = field(default_factory=dict, hash=False)
    # (tid, ctaid) of the analyzed thread
    representative_thread: tuple = ((0, 0, 0), (0, 0, 0))

    def __post_init__(self):
        object.__setattr__(self, "grid", _triple(self.grid, "grid"))
        object.__setattr__(self, "block", _triple(self.block, "block"))
        tid, ctaid = self.representative_thread
        if any(not 0 <= t < b for t, b in zip(tid, self.block)) or \
                any(not 0 <= c < g for c, g in zip(ctaid, self.grid)):
            raise InputError("representative thread lies outside the launch")

    @property
    def threads(self) -> int:
        return prod(self.grid) * prod(self.block)


class BranchPolicy(str, Enum):
    Fail = "fail"
    AssumeTaken = "taken"
    AssumeNotTaken = "not-taken"


@dataclass(frozen=True)
class AnalysisConfig:
    max_trip_count: int = 2**20
    branch_policy: BranchPolicy = BranchPolicy.Fail
    strict_opcodes: bool = True

    def __post_init__(self):
        if self.max_trip_count < 1:
            raise InputError("max_trip_count must be >= 1")
        object.__setattr__(self, "branch_policy", BranchPolicy(self.branch_policy))


@dataclass(frozen=True)
class InstructionMix:
    counts: dict
    per_thread: bool = True
    kernel: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        full = {cat: 0 for cat in CATEGORY_ORDER}
        for cat, n in self.counts.items():
            cat = OpCategory(cat)
            if n < 0:
                raise InputError(f"negative count for {cat.value}")
            full[cat] = int(n)
        object.__setattr__(self, "counts", full)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, cat) -> int:
        return self.counts[OpCategory(cat)]

    def to_json(self) -> dict:
        return {
            "kernel": self.kernel,
            "perThread": self.per_thread,
            "counts": {cat.value: n for cat, n in self.counts.items()},
            "total": self.total,
        }

    @classmethod
    def from_json(cls, data: dict) -> "InstructionMix":
        mix = cls(counts=data["counts"], per_thread=data.get("perThread", True),
                  kernel=data.get("kernel"))
        if "total" in data and data["total"] != mix.total:
            raise InputError(f"mix total {data['total']} != sum of counts {mix.total}")
        return mix


def scale_to_launch(mix: InstructionMix, launch: LaunchConfig) -> InstructionMix:
    """Multiply per-thread counts by the number of threads in the launch."""
    if not mix.per_thread:
        raise InputError("mix is already scaled to a launch")
    threads = launch.threads
    counts = {}
    for cat, n in mix.counts.items():
        scaled = n * threads
        if scaled > COUNT_MAX:
            raise Overflow(f"{cat.value} count {n} x {threads} threads exceeds 64 bits")
        counts[cat] = scaled
    if sum(counts.values()) > COUNT_MAX:
        raise Overflow("total count exceeds 64 bits")
    return InstructionMix(counts, per_thread=False, kernel=mix.kernel)


MIX_FEATURE_NAMES = tuple(f"mix_{cat.value}" for cat in CATEGORY_ORDER) + ("mix_total",)


def mix_to_features(mix: Optional[InstructionMix]) -> list:
    """One value per category in CATEGORY_ORDER, then the total."""
    if mix is None:
        return [0] * len(MIX_FEATURE_NAMES)
    return [mix.counts[cat] for cat in CATEGORY_ORDER] + [mix.total]
