"""Hybrid instruction counting over the control flow graph.

Straight-line code is counted statically, one precomputed per-block tally at a
time. Only the *control slice* is simulated: the instructions that
transitively feed a guard predicate (loop induction variables, bounds,
compares). Body arithmetic, memory traffic and everything else never runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from gpe.cfg import Cfg, TermKind, build_cfg, dominators, find_loops
from gpe.errors import BranchUnresolved, TripCountExceeded, TripCountUnresolved
from gpe.hypa.mix import AnalysisConfig, BranchPolicy, InstructionMix, LaunchConfig
from gpe.hypa.semantics import (
    as_kind,
    dest_kind,
    evaluate,
    source_kinds,
    special_value,
    symbol_addresses,
)
from gpe.ptx.opcodes import SCALAR_WIDTHS
from gpe.ptx.ast import (
    CATEGORY_ORDER,
    Address,
    Immediate,
    KernelDef,
    Param,
    Register,
    SpecialRegister,
    Vector,
)


class Unknown:
    """A value not determinable at design time; remembers where it came from."""

    __slots__ = ("origin", "reason")

    def __init__(self, origin: str, reason: str = "never written"):
        self.origin = origin
        self.reason = reason

    def __repr__(self):
        return f"Unknown({self.origin}: {self.reason})"


def _written_registers(ins):
    dst = ins.dst
    if ins.opcode == "st" or dst is None:
        return ()
    if isinstance(dst, Vector):
        return tuple(item.name for item in dst.items)
    if isinstance(dst, Register):
        return (dst.name,)
    return ()


def _read_registers(ins):
    names = []
    for op in ins.srcs:
        stack = [op]
        while stack:
            x = stack.pop()
            if isinstance(x, Register):
                names.append(x.name)
            elif isinstance(x, Address):
                stack.append(x.base)
            elif isinstance(x, Vector):
                stack.extend(x.items)
    return names


def control_slice(kernel: KernelDef) -> frozenset:
    """Indices of instructions that transitively define a guard predicate.

    Flow-insensitive, so it over-approximates; executing extra instructions
    is harmless because the slice is closed under its own inputs.
    """
    relevant = {ins.guard.register for ins in kernel.body if ins.guard is not None}
    selected = set()
    changed = True
    while changed:
        changed = False
        for ins in kernel.body:
            if ins.index in selected:
                continue
            if relevant.intersection(_written_registers(ins)):
                selected.add(ins.index)
                if ins.opcode != "ld" or ins.srcs[0].space == "param":
                    relevant.update(_read_registers(ins))
                if ins.guard is not None:
                    relevant.add(ins.guard.register)
                changed = True
    return frozenset(selected)


@dataclass(frozen=True)
class _BlockPlan:
    static: tuple  # counts per CATEGORY_ORDER for unguarded instructions
    events: tuple  # instructions that must be looked at while walking
    term_guarded: object  # guarded terminator instruction, or None


def _plan(kernel: KernelDef, cfg: Cfg, slice_ids):
    cat_index = {cat: i for i, cat in enumerate(CATEGORY_ORDER)}
    plans = []
    for block in cfg.blocks:
        static = [0] * len(CATEGORY_ORDER)
        events = []
        term = None
        for i in block.indices:
            ins = kernel.body[i]
            is_term = i == block.last and (ins.is_branch or ins.is_exit)
            if ins.guard is None:
                static[cat_index[ins.category]] += 1
            if is_term:
                if ins.guard is not None:
                    term = ins
                continue
            if ins.guard is not None or i in slice_ids:
                events.append(ins)
        plans.append(_BlockPlan(tuple(static), tuple(events), term))
    return plans


class _State:
    def __init__(self, kernel, launch):
        self.regs = {}
        self.launch = launch
        self.symbols = symbol_addresses(kernel)
        self.bindings = launch.param_bindings

    def read(self, op, kind):
        if isinstance(op, Register):
            value = self.regs.get(op.name)
            if value is None:
                return Unknown(op.name)
            if isinstance(value, Unknown):
                return value
            value = as_kind(value, kind)
            return (not value) if op.negated else value
        if isinstance(op, Immediate):
            return as_kind(op.value, kind)
        if isinstance(op, SpecialRegister):
            return special_value(op.name, self.launch)
        if isinstance(op, Param):
            return self.symbols[op.name]
        return Unknown(repr(op))

    def load(self, ins, dst, kind, lane):
        src = ins.srcs[0]
        if src.space == "param" and isinstance(src.base, Param):
            key = src.base.name if src.offset == 0 and lane == 0 else \
                f"{src.base.name}+{src.offset + lane * SCALAR_WIDTHS[kind]}"
            if key in self.bindings:
                return as_kind(self.bindings[key], kind)
            return Unknown(dst, f"parameter {key} is not bound")
        # device memory contents are not known at design time
        return Unknown(dst, f"loaded from {src.space} memory")

    def execute(self, ins):
        kind = ins.dtype or "b32"
        if ins.opcode == "ld":
            dst = ins.dst
            if isinstance(dst, Vector):
                for lane, item in enumerate(dst.items):
                    self.regs[item.name] = self.load(ins, item.name, kind, lane)
            else:
                self.regs[dst.name] = self.load(ins, dst.name, kind, 0)
            return
        args = [self.read(s, k) for s, k in zip(ins.srcs, source_kinds(ins))]
        for a in args:
            if isinstance(a, Unknown):
                self.regs[ins.dst.name] = a
                return
        value = evaluate(ins, args)
        self.regs[ins.dst.name] = value if ins.opcode == "setp" else as_kind(value, dest_kind(ins))

    def guard(self, ins):
        value = self.regs.get(ins.guard.register)
        if value is None:
            return Unknown(ins.guard.register)
        if isinstance(value, Unknown):
            return value
        return bool(value) != ins.guard.negated


def analyze(kernel: KernelDef, cfg: Cfg, loops: list, launch: LaunchConfig,
            config: AnalysisConfig = AnalysisConfig()) -> InstructionMix:
    """Exact per-thread dynamic instruction mix without executing the kernel body."""
    slice_ids = control_slice(kernel)
    plans = _plan(kernel, cfg, slice_ids)
    state = _State(kernel, launch)
    ncat = len(CATEGORY_ORDER)
    cat_index = {cat: i for i, cat in enumerate(CATEGORY_ORDER)}

    back_edges = {lp.back_edge for lp in loops}
    headers = {lp.header for lp in loops}
    # innermost-first list of loops containing each block
    containing = {b.id: sorted((lp for lp in loops if b.id in lp.body), key=lambda lp: len(lp.body))
                  for b in cfg.blocks}

    executions = [0] * len(cfg.blocks)
    guarded = [0] * ncat
    trips = {}
    policy = config.branch_policy
    limit = config.max_trip_count

    def resolve(block_id, ins, value, taken_succ, other_succ):
        """Decision for an Unknown guard; True means the guarded instruction runs."""
        if policy is BranchPolicy.AssumeTaken:
            return True
        if policy is BranchPolicy.AssumeNotTaken:
            return False
        if ins.is_branch or ins.is_exit:
            for lp in containing[block_id]:
                leaves = any(s is None or s not in lp.body for s in (taken_succ, other_succ))
                if leaves or (block_id, taken_succ) in back_edges:
                    raise TripCountUnresolved(lp.header, value.origin, ins.index)
        raise BranchUnresolved(ins.index, value.origin)

    current = cfg.entry
    while current is not None:
        executions[current] += 1
        plan = plans[current]
        for ins in plan.events:
            if ins.guard is not None:
                g = state.guard(ins)
                if isinstance(g, Unknown):
                    g = resolve(current, ins, g, None, None)
                if not g:
                    continue
                guarded[cat_index[ins.category]] += 1
            if ins.opcode not in ("bar", "st"):
                state.execute(ins)

        term = cfg.blocks[current].terminator
        kind = term.kind
        if kind is TermKind.FallThrough:
            nxt = term.fallthrough
        elif kind is TermKind.UncondBranch:
            nxt = term.target
        elif kind is TermKind.Exit:
            nxt = None
        else:
            ins = plan.term_guarded
            taken_succ = term.target if kind is TermKind.CondBranch else None
            g = state.guard(ins)
            if isinstance(g, Unknown):
                g = resolve(current, ins, g, taken_succ, term.fallthrough)
            if g:
                guarded[cat_index[ins.category]] += 1
                nxt = taken_succ
            else:
                nxt = term.fallthrough

        if nxt is not None and nxt in headers:
            if (current, nxt) in back_edges:
                trips[nxt] += 1
                if trips[nxt] > limit:
                    raise TripCountExceeded(nxt, limit)
            else:
                trips[nxt] = 1
        current = nxt

    totals = [0] * ncat
    for b, n in enumerate(executions):
        if n:
            static = plans[b].static
            for c in range(ncat):
                totals[c] += n * static[c]
    counts = {cat: totals[i] + guarded[i] for i, cat in enumerate(CATEGORY_ORDER)}
    return InstructionMix(counts, per_thread=True, kernel=kernel.name)


@lru_cache(maxsize=256)
def _structure(kernel: KernelDef):
    cfg = build_cfg(kernel)
    loops = find_loops(cfg, dominators(cfg))
    return cfg, loops


def analyze_kernel(kernel: KernelDef, launch: LaunchConfig,
                   config: AnalysisConfig = AnalysisConfig()) -> InstructionMix:
    """Build the CFG and loops for ``kernel`` (raising on irreducible flow) and analyze it."""
    cfg, loops = _structure(kernel)
    return analyze(kernel, cfg, loops, launch, config)
