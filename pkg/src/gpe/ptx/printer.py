"""Render a parsed program back to PTX text."""

from __future__ import annotations

from gpe.ptx.ast import (
    Address,
    Immediate,
    Instruction,
    KernelDef,
    Label,
    Param,
    PtxProgram,
    Register,
    SpecialRegister,
    Vector,
)


def format_operand(op) -> str:
    if isinstance(op, Register):
        return ("!" if op.negated else "") + op.name
    if isinstance(op, Immediate):
        return op.text
    if isinstance(op, (Param, Label, SpecialRegister)):
        return op.name
    if isinstance(op, Address):
        base = format_operand(op.base)
        if op.offset > 0:
            return f"[{base}+{op.offset}]"
        if op.offset < 0:
            return f"[{base}-{-op.offset}]"
        return f"[{base}]"
    if isinstance(op, Vector):
        return "{" + ", ".join(format_operand(x) for x in op.items) + "}"
    raise TypeError(op)


def format_instruction(ins: Instruction) -> str:
    operands = ([ins.dst] if ins.dst is not None else []) + list(ins.srcs)
    text = ins.mnemonic
    if operands:
        text += " " + ", ".join(format_operand(op) for op in operands)
    if ins.guard is not None:
        text = f"{ins.guard} {text}"
    return text + ";"


def format_kernel(kernel: KernelDef) -> str:
    lines = []
    params = []
    for p in kernel.params:
        suffix = f"[{p.count}]" if p.count != 1 else ""
        params.append(f"\t.param .{p.kind} {p.name}{suffix}")
    if params:
        lines.append(f".visible .entry {kernel.name}(")
        lines.append(",\n".join(params))
        lines.append(")")
    else:
        lines.append(f".visible .entry {kernel.name}()")
    lines.append("{")
    for r in kernel.registers:
        name = r.prefix if r.count is None else f"{r.prefix}<{r.count}>"
        lines.append(f"\t.reg .{r.kind} {name};")
    for v in kernel.variables:
        align = f" .align {v.align}" if v.align is not None else ""
        suffix = f"[{v.count}]" if v.count != 1 else ""
        lines.append(f"\t.{v.space}{align} .{v.kind} {v.name}{suffix};")
    by_index = {}
    for name, idx in kernel.labels.items():
        by_index.setdefault(idx, []).append(name)
    for ins in kernel.body:
        for name in by_index.get(ins.index, ()):
            lines.append(f"{name}:")
        lines.append("\t" + format_instruction(ins))
    for name in by_index.get(len(kernel.body), ()):
        lines.append(f"{name}:")
    lines.append("}")
    return "\n".join(lines)


def format_program(program: PtxProgram) -> str:
    head = []
    if program.version:
        head.append(f".version {program.version}")
    if program.target:
        head.append(f".target {program.target}")
    if program.address_size is not None:
        head.append(f".address_size {program.address_size}")
    parts = ["\n".join(head)] + [format_kernel(k) for k in program.kernels]
    return "\n\n".join(parts) + "\n"
