"""Reference interpreter: executes one thread instruction by instruction.

This is the correctness oracle for :func:`gpe.hypa.analyzer.analyze`. It
shares only value semantics with the analyzer; control flow and counting are
done independently here by plain program-counter stepping.
"""

from __future__ import annotations

from collections import Counter

from gpe.errors import NonTermination, UnboundValue
from gpe.hypa.mix import InstructionMix, LaunchConfig
from gpe.hypa.semantics import (
    as_kind,
    dest_kind,
    evaluate,
    source_kinds,
    special_value,
    symbol_addresses,
)
from gpe.ptx.ast import (
    Address,
    Immediate,
    KernelDef,
    Param,
    Register,
    SpecialRegister,
    Vector,
)
from gpe.ptx.opcodes import SCALAR_WIDTHS

DEFAULT_MAX_STEPS = 10 * 2**20


def interpret(kernel: KernelDef, launch: LaunchConfig,
              max_steps: int = DEFAULT_MAX_STEPS) -> InstructionMix:
    """Count every instruction the representative thread executes.

    Memory is a sparse map keyed by (state space, address); locations never
    written read as zero. Parameter loads read ``launch.param_bindings``.
    """
    regs = {}
    memory = {}
    symbols = symbol_addresses(kernel)
    bindings = launch.param_bindings
    body = kernel.body
    labels = kernel.labels
    counts = Counter()

    def read(op, kind):
        if isinstance(op, Register):
            try:
                value = regs[op.name]
            except KeyError:
                raise UnboundValue(f"register {op.name} read before written") from None
            value = as_kind(value, kind)
            return (not value) if op.negated else value
        if isinstance(op, Immediate):
            return as_kind(op.value, kind)
        if isinstance(op, SpecialRegister):
            return special_value(op.name, launch)
        if isinstance(op, Param):
            return symbols[op.name]
        raise UnboundValue(f"cannot read operand {op!r}")

    def address(op: Address):
        if isinstance(op.base, Param):
            if op.space == "param":
                return None
            return symbols[op.base.name] + op.offset
        return read(op.base, "u64") + op.offset

    def load(op: Address, kind, lane):
        if op.space == "param" and isinstance(op.base, Param):
            key = op.base.name if op.offset == 0 and lane == 0 else \
                f"{op.base.name}+{op.offset + lane * SCALAR_WIDTHS[kind]}"
            if key not in bindings:
                raise UnboundValue(f"parameter {key} is not bound")
            return as_kind(bindings[key], kind)
        addr = address(op) + lane * SCALAR_WIDTHS[kind]
        return memory.get((op.space, addr), 0)

    n = len(body)
    pc = 0
    steps = 0
    while pc < n:
        steps += 1
        if steps > max_steps:
            raise NonTermination(f"kernel {kernel.name} exceeded {max_steps} steps")
        ins = body[pc]
        if ins.guard is not None:
            g = regs.get(ins.guard.register)
            if g is None:
                raise UnboundValue(f"guard {ins.guard.register} read before written")
            if bool(g) == ins.guard.negated:
                pc += 1
                continue
        counts[ins.category] += 1
        op = ins.opcode

        if op == "bra":
            pc = labels[ins.label]
            continue
        if op in ("ret", "exit"):
            break
        if op == "bar":
            pc += 1
            continue

        kind = ins.dtype or "b32"
        if op == "ld":
            dst = ins.dst
            if isinstance(dst, Vector):
                for lane, item in enumerate(dst.items):
                    regs[item.name] = load(ins.srcs[0], kind, lane)
            else:
                regs[dst.name] = load(ins.srcs[0], kind, 0)
        elif op == "st":
            base = address(ins.dst)
            src = ins.srcs[0]
            items = src.items if isinstance(src, Vector) else (src,)
            for lane, item in enumerate(items):
                memory[(ins.dst.space, base + lane * SCALAR_WIDTHS[kind])] = read(item, kind)
        else:
            args = [read(s, k) for s, k in zip(ins.srcs, source_kinds(ins))]
            value = evaluate(ins, args)
            regs[ins.dst.name] = as_kind(value, dest_kind(ins)) if op != "setp" else value
        pc += 1

    return InstructionMix(dict(counts), per_thread=True, kernel=kernel.name)
