"""CNN and GPU descriptors, analytic workload statistics and feature fusion."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional

from gpe import SCHEMA_VERSION
from gpe.errors import ClockOutOfRange, InputError, ShapeError
from gpe.hypa.mix import MIX_FEATURE_NAMES, InstructionMix, mix_to_features


class LayerKind(str, Enum):
    Conv2d = "Conv2d"
    DepthwiseConv2d = "DepthwiseConv2d"
    Dense = "Dense"
    MaxPool = "MaxPool"
    AvgPool = "AvgPool"
    GlobalAvgPool = "GlobalAvgPool"
    BatchNorm = "BatchNorm"
    Activation = "Activation"
    Add = "Add"
    Flatten = "Flatten"


LAYER_KINDS = tuple(LayerKind)
_WINDOWED = (LayerKind.Conv2d, LayerKind.DepthwiseConv2d, LayerKind.MaxPool, LayerKind.AvgPool)


class FormFactor(str, Enum):
    datacenter = "datacenter"
    desktop = "desktop"
    embedded = "embedded"


@dataclass(frozen=True)
class LayerSpec:
    kind: LayerKind
    kernel: tuple = (1, 1)
    stride: tuple = (1, 1)
    padding: str = "valid"
    filters: int = 0  # conv output channels / dense output features
    activation: str = ""
    source: int = -1  # Add: index of the layer whose output is added (-1 = network input)

    def __post_init__(self):
        object.__setattr__(self, "kind", LayerKind(self.kind))
        object.__setattr__(self, "kernel", _pair(self.kernel, "kernel"))
        object.__setattr__(self, "stride", _pair(self.stride, "stride"))
        if self.padding not in ("same", "valid"):
            raise InputError(f"padding must be 'same' or 'valid', got {self.padding!r}")
        if self.kind in (LayerKind.Conv2d, LayerKind.Dense) and self.filters < 1:
            raise InputError(f"{self.kind.value} needs filters >= 1")

    @classmethod
    def from_json(cls, data: dict) -> "LayerSpec":
        data = dict(data)
        kind = data.pop("kind")
        if "units" in data:
            data["filters"] = data.pop("units")
        unknown = set(data) - {"kernel", "stride", "padding", "filters", "activation", "source"}
        if unknown:
            raise InputError(f"unknown layer fields {sorted(unknown)} for {kind}")
        try:
            return cls(kind=kind, **data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"bad layer {kind}: {exc}") from None

    def to_json(self) -> dict:
        out = {"kind": self.kind.value}
        if self.kind in _WINDOWED:
            out.update(kernel=list(self.kernel), stride=list(self.stride), padding=self.padding)
        if self.kind in (LayerKind.Conv2d, LayerKind.Dense):
            out["filters"] = self.filters
        if self.kind is LayerKind.Activation:
            out["activation"] = self.activation
        if self.kind is LayerKind.Add:
            out["source"] = self.source
        return out


def _pair(value, what):
    if isinstance(value, int):
        value = (value, value)
    value = tuple(int(v) for v in value)
    if len(value) != 2 or min(value) < 1:
        raise InputError(f"{what} extents must be two integers >= 1, got {value}")
    return value


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    input_shape: tuple
    layers: tuple

    @classmethod
    def from_json(cls, data: dict) -> "NetworkSpec":
        try:
            return cls(data["name"], tuple(int(v) for v in data["input"]),
                       tuple(LayerSpec.from_json(layer) for layer in data["layers"]))
        except KeyError as exc:
            raise InputError(f"network descriptor missing field {exc}") from None

    def to_json(self) -> dict:
        return {"name": self.name, "input": list(self.input_shape),
                "layers": [layer.to_json() for layer in self.layers]}


def load_network(path) -> NetworkSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    return NetworkSpec.from_json(data)


def network_dir() -> Path:
    return Path(str(resources.files("gpe") / "data" / "networks"))


@dataclass(frozen=True)
class GpuSpec:
    name: str
    sm_count: int
    cores_per_sm: int
    base_mhz: int
    max_mhz: int
    mem_gib: float
    bw_gbs: float
    tdp_w: float
    die_mm2: float
    form_factor: FormFactor

    def __post_init__(self):
        object.__setattr__(self, "form_factor", FormFactor(self.form_factor))
        numbers = (self.sm_count, self.cores_per_sm, self.base_mhz, self.max_mhz,
                   self.mem_gib, self.bw_gbs, self.tdp_w, self.die_mm2)
        if min(numbers) <= 0:
            raise InputError(f"GPU {self.name}: all quantities must be positive")
        if self.base_mhz > self.max_mhz:
            raise InputError(f"GPU {self.name}: base clock above max clock")

    @property
    def total_cores(self) -> int:
        return self.sm_count * self.cores_per_sm

    def check_clock(self, clock_mhz, override=False):
        if not override and not self.base_mhz <= clock_mhz <= self.max_mhz:
            raise ClockOutOfRange(clock_mhz, self.base_mhz, self.max_mhz, f"for {self.name}")


GPU_CSV_HEADER = ("name", "sm_count", "cores_per_sm", "base_mhz", "max_mhz", "mem_gib",
                  "bw_gbs", "tdp_w", "die_mm2", "form_factor")


def parse_gpu_db(text: str) -> dict:
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader, ()))
    if header != GPU_CSV_HEADER:
        raise InputError(f"GPU database header must be {','.join(GPU_CSV_HEADER)}")
    gpus = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(GPU_CSV_HEADER):
            raise InputError(f"GPU database line {lineno}: expected {len(GPU_CSV_HEADER)} fields")
        try:
            gpu = GpuSpec(row[0], int(row[1]), int(row[2]), int(row[3]), int(row[4]),
                          float(row[5]), float(row[6]), float(row[7]), float(row[8]), row[9])
        except ValueError as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"GPU database line {lineno}: {exc}") from None
        gpus[gpu.name] = gpu
    return gpus


def load_gpu_db(path=None) -> dict:
    if path is None:
        text = (resources.files("gpe") / "data" / "gpus.csv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_gpu_db(text)


def gpu_db_to_csv(gpus) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(GPU_CSV_HEADER)
    for g in gpus:
        writer.writerow([g.name, g.sm_count, g.cores_per_sm, g.base_mhz, g.max_mhz, g.mem_gib,
                         g.bw_gbs, g.tdp_w, g.die_mm2, g.form_factor.value])
    return buf.getvalue()


# -- shape inference and counting --------------------------------------------

@dataclass(frozen=True)
class LayerShape:
    index: int
    layer: LayerSpec
    input_shape: tuple
    output_shape: tuple


def _window(size, k, s, padding, index, axis):
    if padding == "same":
        out = math.ceil(size / s)
    else:
        out = (size - k) // s + 1 if size >= k else 0
    if out < 1:
        raise ShapeError(index, f"{axis} extent {size} too small for kernel {k} stride {s}")
    return out


def infer_shapes(net: NetworkSpec) -> list:
    if not net.input_shape or min(net.input_shape) < 1:
        raise ShapeError(-1, f"non-positive input shape {net.input_shape}")
    shape = tuple(net.input_shape)
    outputs = []
    result = []
    for i, layer in enumerate(net.layers):
        kind = layer.kind
        if kind in _WINDOWED or kind is LayerKind.GlobalAvgPool:
            if len(shape) != 3:
                raise ShapeError(i, f"{kind.value} needs a rank-3 (h,w,c) input, got {shape}")
        if kind in _WINDOWED:
            h, w, c = shape
            oh = _window(h, layer.kernel[0], layer.stride[0], layer.padding, i, "height")
            ow = _window(w, layer.kernel[1], layer.stride[1], layer.padding, i, "width")
            out = (oh, ow, layer.filters if kind is LayerKind.Conv2d else c)
        elif kind is LayerKind.GlobalAvgPool:
            out = (shape[2],)
        elif kind is LayerKind.Dense:
            if len(shape) != 1:
                raise ShapeError(i, f"Dense needs a flat input, got {shape}; insert Flatten")
            out = (layer.filters,)
        elif kind is LayerKind.Flatten:
            out = (math.prod(shape),)
        elif kind is LayerKind.Add:
            if not -1 <= layer.source < i:
                raise ShapeError(i, f"Add source {layer.source} must name an earlier layer")
            other = net.input_shape if layer.source == -1 else outputs[layer.source]
            if tuple(other) != shape:
                raise ShapeError(i, f"Add operands differ in shape: {shape} vs {tuple(other)}")
            out = shape
        else:  # BatchNorm, Activation
            out = shape
        outputs.append(out)
        result.append(LayerShape(i, layer, shape, out))
        shape = out
    return result


def _channels(shape):
    return shape[-1]


def count_params(layer: LayerSpec, input_shape) -> int:
    kind = layer.kind
    kh, kw = layer.kernel
    if kind is LayerKind.Conv2d:
        return kh * kw * _channels(input_shape) * layer.filters + layer.filters
    if kind is LayerKind.DepthwiseConv2d:
        cin = _channels(input_shape)
        return kh * kw * cin + cin
    if kind is LayerKind.Dense:
        return input_shape[0] * layer.filters + layer.filters
    if kind is LayerKind.BatchNorm:
        return 2 * _channels(input_shape)
    return 0


def count_macs(layer: LayerSpec, input_shape, output_shape) -> int:
    kind = layer.kind
    kh, kw = layer.kernel
    if kind is LayerKind.Conv2d:
        oh, ow, cout = output_shape
        return oh * ow * cout * kh * kw * _channels(input_shape)
    if kind is LayerKind.DepthwiseConv2d:
        oh, ow, _ = output_shape
        return oh * ow * _channels(input_shape) * kh * kw
    if kind is LayerKind.Dense:
        return input_shape[0] * layer.filters
    return 0


@dataclass(frozen=True)
class NetworkStats:
    histogram: dict
    total_params: int
    total_macs: int
    total_activations: int
    depth: int
    per_layer: tuple = field(default=(), compare=False)


def network_stats(net: NetworkSpec) -> NetworkStats:
    shapes = infer_shapes(net)
    hist = {k: 0 for k in LAYER_KINDS}
    params = macs = acts = 0
    rows = []
    for s in shapes:
        hist[s.layer.kind] += 1
        p = count_params(s.layer, s.input_shape)
        m = count_macs(s.layer, s.input_shape, s.output_shape)
        params += p
        macs += m
        acts += math.prod(s.output_shape)
        rows.append((s, p, m))
    return NetworkStats(hist, params, macs, acts, len(net.layers), tuple(rows))


# -- features -----------------------------------------------------------------

NETWORK_FEATURES = tuple(f"n_{k.value}" for k in LAYER_KINDS) + (
    "total_params", "total_macs", "total_activations", "depth")
HARDWARE_FEATURES = ("sm_count", "cores_per_sm", "total_cores", "base_mhz", "max_mhz",
                     "mem_gib", "bw_gbs", "tdp_w", "die_mm2") + tuple(
    f"form_{f.value}" for f in FormFactor)
FEATURE_NAMES = NETWORK_FEATURES + HARDWARE_FEATURES + ("clock_mhz", "mix_present") + MIX_FEATURE_NAMES


@dataclass(frozen=True)
class FeatureVector:
    names: tuple
    values: tuple
    schema_version: str = SCHEMA_VERSION

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.names)
        writer.writerow([_fmt(v) for v in self.values])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return repr(v) if isinstance(v, float) else str(v)


def extract_features(net: NetworkSpec, gpu: GpuSpec, clock_mhz: int,
                     mix: Optional[InstructionMix] = None, allow_any_clock: bool = False,
                     stats: Optional[NetworkStats] = None) -> FeatureVector:
    gpu.check_clock(clock_mhz, allow_any_clock)
    stats = stats or network_stats(net)
    values = [stats.histogram[k] for k in LAYER_KINDS]
    values += [stats.total_params, stats.total_macs, stats.total_activations, stats.depth]
    values += [gpu.sm_count, gpu.cores_per_sm, gpu.total_cores, gpu.base_mhz, gpu.max_mhz,
               gpu.mem_gib, gpu.bw_gbs, gpu.tdp_w, gpu.die_mm2]
    values += [1 if gpu.form_factor is f else 0 for f in FormFactor]
    values += [clock_mhz, 1 if mix is not None else 0]
    values += mix_to_features(mix)
    return FeatureVector(FEATURE_NAMES, tuple(values))
