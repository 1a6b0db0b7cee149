"""Typed representation of parsed PTX.

All nodes are frozen dataclasses. Source line numbers are carried for
diagnostics but excluded from equality, so a program reparsed from its
pretty-printed form compares equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union


class OpCategory(str, Enum):
    IntArith = "IntArith"
    FloatArith = "FloatArith"
    SpecialFunc = "SpecialFunc"
    Load = "Load"
    Store = "Store"
    Move = "Move"
    Convert = "Convert"
    Compare = "Compare"
    SetPred = "SetPred"
    Branch = "Branch"
    Sync = "Sync"
    Return = "Return"
    Other = "Other"


# Documented order for every per-category report and feature block.
CATEGORY_ORDER = tuple(OpCategory)

SPECIAL_REGISTERS = frozenset(
    f"%{base}.{axis}" for base in ("tid", "ntid", "ctaid", "nctaid") for axis in "xyz"
)

STATE_SPACES = ("global", "shared", "local", "param")


@dataclass(frozen=True)
class Register:
    name: str
    negated: bool = False  # only meaningful for predicate sources, e.g. `!%p1`

    kind = "register"


@dataclass(frozen=True)
class Immediate:
    text: str  # exact literal as written
    value: Union[int, float]

    kind = "immediate"


@dataclass(frozen=True)
class Param:
    """A named symbol: a kernel parameter or a declared variable."""

    name: str

    kind = "param"


@dataclass(frozen=True)
class Label:
    """Branch target operand."""

    name: str

    kind = "label"


@dataclass(frozen=True)
class SpecialRegister:
    name: str  # e.g. "%tid.x"

    kind = "special"

    @property
    def base(self) -> str:
        return self.name[1:].split(".")[0]

    @property
    def axis(self) -> int:
        return "xyz".index(self.name[-1])


@dataclass(frozen=True)
class Address:
    base: Operand
    offset: int
    space: str  # one of STATE_SPACES

    kind = "address"


@dataclass(frozen=True)
class Vector:
    items: tuple

    kind = "vector"


Operand = Union[Register, Immediate, Param, Label, SpecialRegister, Address, Vector]


@dataclass(frozen=True)
class Guard:
    register: str
    negated: bool = False

    def __str__(self):
        return f"@{'!' if self.negated else ''}{self.register}"


@dataclass(frozen=True)
class Instruction:
    index: int
    opcode: str
    modifiers: tuple
    dtype: Optional[str]
    dst: Optional[Operand]
    srcs: tuple
    category: OpCategory
    guard: Optional[Guard] = None
    line: int = field(default=0, compare=False)

    @property
    def mnemonic(self) -> str:
        return ".".join((self.opcode,) + self.modifiers)

    @property
    def is_branch(self) -> bool:
        return self.category is OpCategory.Branch

    @property
    def is_exit(self) -> bool:
        return self.category is OpCategory.Return

    @property
    def label(self) -> Optional[str]:
        """Branch target label, for branch instructions."""
        if self.is_branch:
            return self.srcs[0].name
        return None


@dataclass(frozen=True)
class ParamDecl:
    name: str
    kind: str  # scalar kind, e.g. "u64"
    width: int  # bytes
    count: int = 1  # array length for `.b8 name[16]` style params


@dataclass(frozen=True)
class RegDecl:
    """A `.reg` declaration: either a counted class `%r<5>` or a single name."""

    prefix: str
    kind: str
    count: Optional[int] = None  # None for a single named register

    def names(self):
        if self.count is None:
            return [self.prefix]
        return [f"{self.prefix}{i}" for i in range(self.count)]


@dataclass(frozen=True)
class VarDecl:
    name: str
    space: str
    kind: str
    count: int = 1
    align: Optional[int] = None


@dataclass(frozen=True)
class KernelDef:
    name: str
    params: tuple
    registers: tuple
    body: tuple
    labels: dict = field(hash=False)
    variables: tuple = ()
    entry: bool = True
    line: int = field(default=0, compare=False)

    def declared_registers(self) -> set:
        names = set()
        for decl in self.registers:
            names.update(decl.names())
        return names

    def param(self, name: str) -> Optional[ParamDecl]:
        for p in self.params:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class PtxProgram:
    version: str
    target: str
    kernels: tuple
    address_size: Optional[int] = None
    warnings: tuple = field(default=(), compare=False)

    def kernel(self, name: Optional[str] = None) -> KernelDef:
        from gpe.errors import KernelNotFound

        if name is None:
            if len(self.kernels) == 1:
                return self.kernels[0]
            raise KernelNotFound(
                f"program has {len(self.kernels)} kernels; pick one of "
                f"{[k.name for k in self.kernels]}")
        for k in self.kernels:
            if k.name == name:
                return k
        raise KernelNotFound(f"no kernel named {name!r}")


def operand_to_json(op):
    if op is None:
        return None
    if isinstance(op, Register):
        out = {"kind": "register", "name": op.name}
        if op.negated:
            out["negated"] = True
        return out
    if isinstance(op, Immediate):
        return {"kind": "immediate", "text": op.text, "value": op.value}
    if isinstance(op, Param):
        return {"kind": "param", "name": op.name}
    if isinstance(op, Label):
        return {"kind": "label", "name": op.name}
    if isinstance(op, SpecialRegister):
        return {"kind": "special", "name": op.name}
    if isinstance(op, Address):
        return {"kind": "address", "base": operand_to_json(op.base),
                "offset": op.offset, "space": op.space}
    if isinstance(op, Vector):
        return {"kind": "vector", "items": [operand_to_json(x) for x in op.items]}
    raise TypeError(op)


def program_to_json(program: PtxProgram, kernel: Optional[str] = None) -> dict:
    kernels = program.kernels if kernel is None else (program.kernel(kernel),)
    return {
        "version": program.version,
        "target": program.target,
        "warnings": list(program.warnings),
        "kernels": [
            {
                "name": k.name,
                "params": [{"name": p.name, "kind": p.kind, "width": p.width, "count": p.count}
                           for p in k.params],
                "registers": [{"prefix": r.prefix, "kind": r.kind, "count": r.count}
                              for r in k.registers],
                "variables": [{"name": v.name, "space": v.space, "kind": v.kind,
                               "count": v.count} for v in k.variables],
                "labels": dict(sorted(k.labels.items(), key=lambda kv: kv[1])),
                "body": [
                    {
                        "index": ins.index,
                        "line": ins.line,
                        "guard": None if ins.guard is None else
                        {"register": ins.guard.register, "negated": ins.guard.negated},
                        "opcode": ins.opcode,
                        "modifiers": list(ins.modifiers),
                        "dtype": ins.dtype,
                        "dst": operand_to_json(ins.dst),
                        "srcs": [operand_to_json(s) for s in ins.srcs],
                        "category": ins.category.value,
                    }
                    for ins in k.body
                ],
            }
            for k in kernels
        ],
    }
