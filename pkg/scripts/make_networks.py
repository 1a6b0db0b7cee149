"""Regenerate the simplified EfficientNet-style descriptors in src/gpe/data/networks.

Blocks are MBConv without squeeze-excitation: optional 1x1 expansion, depthwise
conv, 1x1 projection, residual Add when shapes allow.
"""

import json
import math
from pathlib import Path

STAGES = [  # expand, channels, repeats, stride, kernel
    (1, 16, 1, 1, 3), (6, 24, 2, 2, 3), (6, 40, 2, 2, 5), (6, 80, 3, 2, 3),
    (6, 112, 3, 1, 5), (6, 192, 4, 2, 5), (6, 320, 1, 1, 3),
]
VARIANTS = {"efficientnet_b0": (1.0, 1.0, 224), "efficientnet_b1": (1.0, 1.1, 240),
            "efficientnet_b2": (1.1, 1.2, 260)}


def round_filters(c, width, divisor=8):
    c *= width
    new = max(divisor, int(c + divisor / 2) // divisor * divisor)
    if new < 0.9 * c:
        new += divisor
    return int(new)


def conv(filters, k=1, s=1):
    return {"kind": "Conv2d", "kernel": [k, k], "stride": [s, s], "padding": "same", "filters": filters}


def bn_act(layers, act=True):
    layers.append({"kind": "BatchNorm"})
    if act:
        layers.append({"kind": "Activation", "activation": "swish"})


def build(width, depth, res):
    layers = [conv(round_filters(32, width), 3, 2)]
    bn_act(layers)
    cin = round_filters(32, width)
    for expand, ch, reps, stride, k in STAGES:
        cout = round_filters(ch, width)
        for r in range(int(math.ceil(depth * reps))):
            s = stride if r == 0 else 1
            block_in = len(layers) - 1
            if expand != 1:
                layers.append(conv(cin * expand))
                bn_act(layers)
            layers.append({"kind": "DepthwiseConv2d", "kernel": [k, k], "stride": [s, s], "padding": "same"})
            bn_act(layers)
            layers.append(conv(cout))
            bn_act(layers, act=False)
            if s == 1 and cin == cout:
                layers.append({"kind": "Add", "source": block_in})
            cin = cout
    layers.append(conv(round_filters(1280, width)))
    bn_act(layers)
    layers.append({"kind": "GlobalAvgPool"})
    layers.append({"kind": "Dense", "filters": 1000})
    return {"input": [res, res, 3], "layers": layers}


if __name__ == "__main__":
    out = Path(__file__).resolve().parents[1] / "src" / "gpe" / "data" / "networks"
    out.mkdir(parents=True, exist_ok=True)
    for name, (w, d, r) in VARIANTS.items():
        net = {"name": name, **build(w, d, r)}
        (out / f"{name}.json").write_text(json.dumps(net, indent=1) + "\n")
    tiny = {"name": "tiny_cnn", "input": [32, 32, 3], "layers": [
        conv(16, 3, 1), {"kind": "GlobalAvgPool"}, {"kind": "Dense", "filters": 10}]}
    (out / "tiny_cnn.json").write_text(json.dumps(tiny, indent=1) + "\n")
