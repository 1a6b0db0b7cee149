"""Hand tally of parameters and MACs for the shipped descriptors.

Deliberately independent of gpe.workload: works block by block from the
stage table with closed-form MBConv formulas and explicit spatial sizes.
"""

import json
import math
from pathlib import Path

STAGES = [(1, 16, 1, 1, 3), (6, 24, 2, 2, 3), (6, 40, 2, 2, 5), (6, 80, 3, 2, 3),
          (6, 112, 3, 1, 5), (6, 192, 4, 2, 5), (6, 320, 1, 1, 3)]
VARIANTS = {"efficientnet_b0": (1.0, 1.0, 224), "efficientnet_b1": (1.0, 1.1, 240),
            "efficientnet_b2": (1.1, 1.2, 260)}


def rf(c, w):
    c *= w
    n = max(8, int(c + 4) // 8 * 8)
    return int(n + 8 if n < 0.9 * c else n)


def tally(w, d, res):
    size = -(-res // 2)  # stem stride 2, same padding
    c0 = rf(32, w)
    params = 27 * c0 + c0 + 2 * c0
    macs = size * size * c0 * 27
    cin = c0
    for e, ch, reps, stride, k in STAGES:
        cout = rf(ch, w)
        for r in range(math.ceil(d * reps)):
            s = stride if r == 0 else 1
            mid = cin * e
            if e != 1:
                params += cin * mid + mid + 2 * mid
                macs += size * size * cin * mid
            size = -(-size // s)
            params += k * k * mid + mid + 2 * mid
            macs += size * size * mid * k * k
            params += mid * cout + cout + 2 * cout
            macs += size * size * mid * cout
            cin = cout
    head = rf(1280, w)
    params += cin * head + head + 2 * head + head * 1000 + 1000
    macs += size * size * cin * head + head * 1000
    return params, macs


if __name__ == "__main__":
    out = {name: dict(zip(("total_params", "total_macs"), tally(*v))) for name, v in VARIANTS.items()}
    out["tiny_cnn"] = {"total_params": 3 * 3 * 3 * 16 + 16 + 16 * 10 + 10,
                       "total_macs": 32 * 32 * 16 * 3 * 3 * 3 + 16 * 10}
    out["unit_conv2d_k3_32x32x3_to_16"] = {"params": 448, "macs": 442368}
    path = Path(__file__).with_name("efficientnet_tally.json")
    path.write_text(json.dumps(out, indent=2) + "\n")
