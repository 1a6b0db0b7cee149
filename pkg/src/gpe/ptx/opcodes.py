"""Opcode table and instruction classification."""

from __future__ import annotations

from gpe.errors import UnknownOpcode
from gpe.ptx.ast import OpCategory

# Scalar kinds and their byte widths.
SCALAR_WIDTHS = {
    "s8": 1, "s16": 2, "s32": 4, "s64": 8,
    "u8": 1, "u16": 2, "u32": 4, "u64": 8,
    "b8": 1, "b16": 2, "b32": 4, "b64": 8,
    "f16": 2, "f32": 4, "f64": 8,
    "pred": 1,
}

FLOAT_KINDS = frozenset({"f16", "f32", "f64"})

# Arithmetic opcodes whose category depends on the operand type.
_ARITH = frozenset({"add", "sub", "mul", "mad", "fma", "div", "rem", "min", "max", "abs", "neg"})
# Bit/shift ops: outside the documented core subset but ubiquitous in compiled
# index arithmetic, so they are accepted as integer arithmetic.
_BITWISE = frozenset({"and", "or", "xor", "not", "shl", "shr"})
_SPECIAL = frozenset({"sqrt", "rsqrt", "sin", "cos", "lg2", "ex2", "rcp"})

_FIXED = {
    "ld": OpCategory.Load,
    "st": OpCategory.Store,
    "mov": OpCategory.Move,
    "cvt": OpCategory.Convert,
    "cvta": OpCategory.Convert,
    "setp": OpCategory.SetPred,
    "set": OpCategory.Compare,
    "selp": OpCategory.Compare,
    "bra": OpCategory.Branch,
    "bar": OpCategory.Sync,
    "ret": OpCategory.Return,
    "exit": OpCategory.Return,
}

SUPPORTED_OPCODES = frozenset(_ARITH | _BITWISE | _SPECIAL | set(_FIXED))


def scalar_kinds(modifiers) -> list:
    return [m for m in modifiers if m in SCALAR_WIDTHS]


def classify(opcode: str, modifiers=(), strict: bool = True) -> OpCategory:
    """Map an opcode and its dotted modifiers to an :class:`OpCategory`.

    With ``strict=False`` unsupported opcodes map to ``OpCategory.Other``
    instead of raising :class:`UnknownOpcode`.
    """
    if opcode in _FIXED:
        return _FIXED[opcode]
    if opcode in _SPECIAL:
        return OpCategory.SpecialFunc
    if opcode in _ARITH:
        kinds = scalar_kinds(modifiers)
        if kinds and kinds[-1] in FLOAT_KINDS:
            return OpCategory.FloatArith
        return OpCategory.IntArith
    if opcode in _BITWISE:
        return OpCategory.IntArith
    if strict:
        raise UnknownOpcode(".".join((opcode, *modifiers)))
    return OpCategory.Other


def opcode_table():
    """Yield one representative (opcode, modifiers) pair per supported opcode."""
    for op in sorted(SUPPORTED_OPCODES):
        if op in _ARITH:
            yield op, ("s32",)
            yield op, ("f32",)
        elif op in _SPECIAL:
            yield op, ("approx", "f32")
        elif op == "bar":
            yield op, ("sync",)
        elif op in ("ld", "st"):
            for space in ("global", "shared", "local", "param"):
                yield op, (space, "f32")
        else:
            yield op, ()
