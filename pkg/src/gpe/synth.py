"""Synthetic power/cycle datasets with a known ground-truth law.

Used to check that the predictors learn a known-learnable relationship, as a
desk-scale stand-in for measured GPU data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gpe.predictors.dataset import Dataset
from gpe.workload import (
    FEATURE_NAMES,
    GpuSpec,
    LayerSpec,
    NetworkSpec,
    extract_features,
    network_stats,
)


@dataclass(frozen=True)
class PowerLaw:
    """power = a * cores * clock_mhz + b * macs / bw_gbs + c."""

    a: float = 1.0e-5
    b: float = 2.0e-6
    c: float = 20.0

    def __call__(self, gpu: GpuSpec, clock_mhz: float, macs: float) -> float:
        return self.a * gpu.total_cores * clock_mhz + self.b * macs / gpu.bw_gbs + self.c


def cycle_law(gpu: GpuSpec, clock_mhz: float, macs: float) -> float:
    # compute-bound cycles plus a memory term that grows with clock
    return macs / gpu.total_cores * 2.0 + macs / gpu.bw_gbs * clock_mhz * 1e-3 + 5.0e4


def synthetic_gpus(rng: np.random.Generator, count: int = 8) -> list:
    forms = ["datacenter", "desktop", "embedded"]
    gpus = []
    for i in range(count):
        sm = int(rng.integers(2, 110))
        cores = int(rng.choice([64, 128]))
        base = int(rng.integers(300, 900))
        top = base + int(rng.integers(300, 900))
        gpus.append(GpuSpec(f"synth{i}", sm, cores, base, top, float(rng.choice([4, 8, 16, 32])),
                            float(np.round(rng.uniform(25, 1600), 1)), float(rng.integers(10, 400)),
                            float(rng.integers(100, 830)), forms[i % 3]))
    return gpus


def random_network(rng: np.random.Generator, name: str) -> NetworkSpec:
    res = int(rng.choice([32, 64, 96, 128]))
    layers = []
    channels = 3
    for _ in range(int(rng.integers(2, 7))):
        filters = int(rng.choice([16, 32, 64, 128]))
        layers.append(LayerSpec("Conv2d", kernel=int(rng.choice([1, 3, 5])), padding="same",
                                filters=filters, stride=int(rng.choice([1, 2]))))
        layers.append(LayerSpec("BatchNorm"))
        layers.append(LayerSpec("Activation", activation="relu"))
        channels = filters
    layers.append(LayerSpec("GlobalAvgPool"))
    layers.append(LayerSpec("Dense", filters=int(rng.choice([10, 100, 1000]))))
    del channels
    return NetworkSpec(name, (res, res, 3), tuple(layers))


def power_dataset(samples: int = 500, seed: int = 7, noise: float = 0.03, gpus: int = 8,
                  nets: int = 24, law: PowerLaw = PowerLaw(), target: str = "power_w") -> Dataset:
    """Feature rows over GPUs x networks x clocks with noisy ground-truth targets."""
    rng = np.random.default_rng(seed)
    gpu_list = synthetic_gpus(rng, gpus)
    net_list = [random_network(rng, f"net{i}") for i in range(nets)]
    stats = [network_stats(n) for n in net_list]
    rows, ys = [], []
    for _ in range(samples):
        g = gpu_list[int(rng.integers(len(gpu_list)))]
        j = int(rng.integers(len(net_list)))
        clock = int(rng.integers(g.base_mhz, g.max_mhz + 1))
        fv = extract_features(net_list[j], g, clock, stats=stats[j])
        truth = (law(g, clock, stats[j].total_macs) if target == "power_w"
                 else cycle_law(g, clock, stats[j].total_macs))
        rows.append(fv.values)
        ys.append(truth * (1.0 + noise * rng.standard_normal()))
    return Dataset(FEATURE_NAMES, np.array(rows, dtype=float), np.array(ys), target)
