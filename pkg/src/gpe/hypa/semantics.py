"""Concrete value semantics of the supported PTX subset.

Values are plain Python objects: ``int`` for integer and bit types (kept in
canonical form for the kind they were written with), ``float`` for floating
point kinds and ``bool`` for predicates.
"""

from __future__ import annotations

import math
import struct

from gpe.errors import UnknownOpcode
from gpe.ptx.ast import Instruction, KernelDef
from gpe.ptx.opcodes import FLOAT_KINDS, SCALAR_WIDTHS, scalar_kinds

_COMPARES = {"eq", "ne", "lt", "le", "gt", "ge", "lo", "ls", "hi", "hs",
             "equ", "neu", "ltu", "leu", "gtu", "geu", "num", "nan"}
_BOOLOPS = {"and", "or", "xor"}
_ROUNDING = {"rn", "rz", "rm", "rp", "rni", "rzi", "rmi", "rpi"}


def wrap(value: int, kind: str) -> int:
    bits = SCALAR_WIDTHS[kind] * 8
    value &= (1 << bits) - 1
    if kind[0] == "s" and value >> (bits - 1):
        value -= 1 << bits
    return value


def round_float(value: float, kind: str) -> float:
    if kind == "f64":
        return float(value)
    fmt = "<f" if kind == "f32" else "<e"
    try:
        return struct.unpack(fmt, struct.pack(fmt, value))[0]
    except OverflowError:
        return math.copysign(math.inf, value)


def as_kind(value, kind):
    """Reinterpret/convert a stored value for reading as ``kind``."""
    if kind == "pred":
        return bool(value)
    if kind in FLOAT_KINDS:
        if isinstance(value, float):
            return value
        # integer bit pattern read as float
        width = SCALAR_WIDTHS[kind]
        if width == 8:
            return struct.unpack("<d", struct.pack("<Q", value & (2**64 - 1)))[0]
        if width == 4:
            return struct.unpack("<f", struct.pack("<I", value & (2**32 - 1)))[0]
        return struct.unpack("<e", struct.pack("<H", value & 0xFFFF))[0]
    if isinstance(value, float):
        width = SCALAR_WIDTHS[kind]
        if width == 8:
            bits = struct.unpack("<Q", struct.pack("<d", value))[0]
        else:
            bits = struct.unpack("<I", struct.pack("<f", round_float(value, "f32")))[0]
        return wrap(bits, kind)
    return wrap(int(value), kind)


def _widen(kind: str) -> str:
    return kind[0] + str(SCALAR_WIDTHS[kind] * 16)


def source_kinds(ins: Instruction) -> list:
    """Kind used to read each source operand of ``ins``."""
    op = ins.opcode
    kinds = scalar_kinds(ins.modifiers)
    n = len(ins.srcs)
    dtype = ins.dtype or "b32"
    if op in ("cvt", "set"):
        return [kinds[1] if len(kinds) > 1 else dtype] * n
    if op == "setp":
        return [dtype, dtype] + ["pred"] * (n - 2)
    if op == "selp":
        return [dtype, dtype, "pred"]
    if op in ("shl", "shr"):
        return [dtype, "u32"]
    return [dtype] * n


def dest_kind(ins: Instruction) -> str:
    op = ins.opcode
    if op == "setp":
        return "pred"
    dtype = ins.dtype or "b32"
    if op in ("mul", "mad") and "wide" in ins.modifiers:
        return _widen(dtype)
    return dtype


def _int_div(a, b, kind):
    if b == 0:
        return -1 if kind[0] == "s" else (1 << (SCALAR_WIDTHS[kind] * 8)) - 1
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _int_rem(a, b):
    if b == 0:
        return a
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


def _fdiv(a, b):
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def _compare(cmp, a, b, is_float):
    if is_float and (math.isnan(a) or math.isnan(b)):
        return cmp in ("equ", "neu", "ltu", "leu", "gtu", "geu", "nan")
    if cmp == "num":
        return True
    if cmp == "nan":
        return False
    base = cmp[:-1] if cmp.endswith("u") and len(cmp) == 3 else cmp
    if base in ("eq",):
        return a == b
    if base == "ne":
        return a != b
    if base in ("lt", "lo"):
        return a < b
    if base in ("le", "ls"):
        return a <= b
    if base in ("gt", "hi"):
        return a > b
    if base in ("ge", "hs"):
        return a >= b
    raise UnknownOpcode(f"setp.{cmp}")


def _special(op, x):
    try:
        if op == "sqrt":
            return math.sqrt(x) if x >= 0 else math.nan
        if op == "rsqrt":
            return 1.0 / math.sqrt(x) if x > 0 else (math.inf if x == 0 else math.nan)
        if op == "rcp":
            return _fdiv(1.0, x)
        if op == "sin":
            return math.sin(x) if math.isfinite(x) else math.nan
        if op == "cos":
            return math.cos(x) if math.isfinite(x) else math.nan
        if op == "lg2":
            if x == 0:
                return -math.inf
            return math.log2(x) if x > 0 else math.nan
        if op == "ex2":
            return 2.0 ** x
    except OverflowError:
        return math.inf
    raise UnknownOpcode(op)


def _f2i(x, kind, modifiers):
    if math.isnan(x):
        return 0
    if "rni" in modifiers:
        v = round(x) if math.isfinite(x) else x
    elif "rmi" in modifiers:
        v = math.floor(x) if math.isfinite(x) else x
    elif "rpi" in modifiers:
        v = math.ceil(x) if math.isfinite(x) else x
    else:
        v = math.trunc(x) if math.isfinite(x) else x
    bits = SCALAR_WIDTHS[kind] * 8
    lo, hi = ((-(1 << (bits - 1)), (1 << (bits - 1)) - 1) if kind[0] == "s"
              else (0, (1 << bits) - 1))
    if v == math.inf or v > hi:
        return hi
    if v == -math.inf or v < lo:
        return lo
    return int(v)


def evaluate(ins: Instruction, args: list):
    """Result of a non-memory, non-control instruction given typed source values."""
    op = ins.opcode
    mods = ins.modifiers
    kind = dest_kind(ins)
    src_kind = ins.dtype or "b32"
    is_float = src_kind in FLOAT_KINDS

    if op in ("mov", "cvta"):
        return as_kind(args[0], kind)
    if op == "cvt":
        kinds = scalar_kinds(mods)
        skind = kinds[1] if len(kinds) > 1 else kind
        x = args[0]
        if kind in FLOAT_KINDS:
            return round_float(float(x), kind)
        if skind in FLOAT_KINDS:
            return _f2i(x, kind, mods)
        return wrap(x, kind)
    if op == "setp":
        cmp = next(m for m in mods if m in _COMPARES)
        result = _compare(cmp, args[0], args[1], is_float)
        boolop = next((m for m in mods if m in _BOOLOPS), None)
        if boolop is not None:
            other = args[2]
            result = {"and": result and other, "or": result or other,
                      "xor": result != other}[boolop]
        return result
    if op == "set":
        cmp = next(m for m in mods if m in _COMPARES)
        kinds = scalar_kinds(mods)
        result = _compare(cmp, args[0], args[1], (kinds[1] if len(kinds) > 1 else kind) in FLOAT_KINDS)
        if kind in FLOAT_KINDS:
            return 1.0 if result else 0.0
        return wrap(-1 if result else 0, kind)
    if op == "selp":
        return args[0] if args[2] else args[1]

    if kind == "pred":
        a = args[0]
        if op == "not":
            return not a
        b = args[1]
        return {"and": a and b, "or": a or b, "xor": a != b}[op]

    if op in ("sqrt", "rsqrt", "sin", "cos", "lg2", "ex2", "rcp"):
        return round_float(_special(op, float(args[0])), kind)

    if is_float:
        a = args[0]
        if op == "add":
            r = a + args[1]
        elif op == "sub":
            r = a - args[1]
        elif op == "mul":
            r = a * args[1]
        elif op in ("mad", "fma"):
            r = a * args[1] + args[2]
        elif op == "div":
            r = _fdiv(a, args[1])
        elif op == "min":
            r = args[1] if math.isnan(a) else (a if math.isnan(args[1]) else min(a, args[1]))
        elif op == "max":
            r = args[1] if math.isnan(a) else (a if math.isnan(args[1]) else max(a, args[1]))
        elif op == "abs":
            r = abs(a)
        elif op == "neg":
            r = -a
        else:
            raise UnknownOpcode(ins.mnemonic)
        return round_float(r, kind)

    a = args[0]
    if op == "add":
        r = a + args[1]
    elif op == "sub":
        r = a - args[1]
    elif op in ("mul", "mad"):
        r = a * args[1]
        if "hi" in mods:
            r >>= SCALAR_WIDTHS[src_kind] * 8
        if op == "mad":
            r += args[2]
    elif op == "div":
        r = _int_div(a, args[1], kind)
    elif op == "rem":
        r = _int_rem(a, args[1])
    elif op == "min":
        r = min(a, args[1])
    elif op == "max":
        r = max(a, args[1])
    elif op == "abs":
        r = abs(a)
    elif op == "neg":
        r = -a
    elif op == "and":
        r = a & args[1]
    elif op == "or":
        r = a | args[1]
    elif op == "xor":
        r = a ^ args[1]
    elif op == "not":
        r = ~a
    elif op == "shl":
        r = a << min(args[1], 64)
    elif op == "shr":
        r = a >> min(args[1], 64)  # arithmetic for signed kinds, logical for unsigned
    else:
        raise UnknownOpcode(ins.mnemonic)
    return wrap(r, kind)


def symbol_addresses(kernel: KernelDef) -> dict:
    """Deterministic base address for every declared variable and parameter symbol."""
    names = [v.name for v in kernel.variables] + [p.name for p in kernel.params]
    return {name: (i + 1) << 24 for i, name in enumerate(names)}


def special_value(name: str, launch) -> int:
    base = name[1:].split(".")[0]
    axis = "xyz".index(name[-1])
    if base == "tid":
        return launch.representative_thread[0][axis]
    if base == "ctaid":
        return launch.representative_thread[1][axis]
    if base == "ntid":
        return launch.block[axis]
    return launch.grid[axis]
