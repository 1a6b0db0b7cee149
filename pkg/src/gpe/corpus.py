"""Shipped PTX corpus access and the structured random kernel generator.

Corpus files carry their launch context in header comments::

    // @launch grid=4,1,1 block=256,1,1
    // @bind n=1000 x=0

The generator emits kernels built from sequences, if-diamonds, guarded
instructions and counted loops. Each kernel comes with a sidecar whose
expected instruction counts are derived from the generator's own program
tree, never from the analyzer or interpreter.
"""

from __future__ import annotations

import json
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from gpe.hypa.mix import LaunchConfig
from gpe.ptx.ast import CATEGORY_ORDER, OpCategory

_LAUNCH_RE = re.compile(r"//\s*@launch\s+(.*)")
_BIND_RE = re.compile(r"//\s*@bind\s+(.*)")
_EXPECT_RE = re.compile(r"//\s*@expect\s+(.*)")


def corpus_dir() -> Path:
    return Path(str(resources.files("gpe") / "data" / "corpus"))


def corpus_files() -> list:
    return sorted(corpus_dir().glob("*.ptx"))


def _triple(text):
    return tuple(int(v) for v in text.split(","))


def launch_from_header(text: str) -> LaunchConfig:
    grid = block = (1, 1, 1)
    bindings = {}
    for m in _LAUNCH_RE.finditer(text):
        for item in m.group(1).split():
            key, value = item.split("=")
            if key == "grid":
                grid = _triple(value)
            elif key == "block":
                block = _triple(value)
    for m in _BIND_RE.finditer(text):
        for item in m.group(1).split():
            key, value = item.split("=")
            bindings[key] = int(value)
    return LaunchConfig(grid=grid, block=block, param_bindings=bindings)


def expectations_from_header(text: str) -> dict:
    out = {}
    for m in _EXPECT_RE.finditer(text):
        for item in m.group(1).split():
            key, value = item.split("=")
            out[key] = int(value)
    return out


# -- generator ----------------------------------------------------------------

# (template, category); {i} scratch int reg, {f} scratch float reg, {k} small constant
_STRAIGHT_OPS = [
    ("add.s32 %r0, %r0, {k};", OpCategory.IntArith),
    ("mul.lo.s32 %r0, %r0, {k};", OpCategory.IntArith),
    ("xor.b32 %r1, %r0, {k};", OpCategory.IntArith),
    ("mul.f32 %f0, %f0, 0f3F000000;", OpCategory.FloatArith),
    ("fma.rn.f32 %f0, %f1, 0f3F000000, %f0;", OpCategory.FloatArith),
    ("sqrt.approx.f32 %f1, %f0;", OpCategory.SpecialFunc),
    ("ex2.approx.f32 %f1, %f0;", OpCategory.SpecialFunc),
    ("ld.global.f32 %f1, [%rd0+{o}];", OpCategory.Load),
    ("st.global.f32 [%rd0+{o}], %f0;", OpCategory.Store),
    ("mov.u32 %r1, %r0;", OpCategory.Move),
    ("cvt.rn.f32.s32 %f1, %r0;", OpCategory.Convert),
    ("bar.sync 0;", OpCategory.Sync),
]

_CMPS = {
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
}


@dataclass
class Straight:
    ops: list  # list of (text, category)


@dataclass
class Cond:
    source: str  # "param:<name>" or "loop:<depth>"
    cmp: str
    imm: int


@dataclass
class If:
    cond: Cond
    then: list
    orelse: Optional[list] = None


@dataclass
class GuardedOp:
    cond: Cond
    negated: bool
    op: tuple  # (text, category)


@dataclass
class Loop:
    bound: Union[int, str]  # constant trip count or parameter name
    body: list
    bottom_tested: bool = False


@dataclass
class GenProgram:
    name: str
    body: list
    params: dict = field(default_factory=dict)  # name -> bound value
    launch: LaunchConfig = field(default_factory=LaunchConfig)


class _Builder:
    def __init__(self, rng: random.Random, max_depth: int, trip_budget: int):
        self.rng = rng
        self.max_depth = max_depth
        self.trip_budget = trip_budget
        self.params = {}
        self.statements = 0

    def straight(self):
        ops = []
        for _ in range(self.rng.randint(1, 4)):
            text, cat = self.rng.choice(_STRAIGHT_OPS)
            text = text.format(k=self.rng.randint(1, 9), o=4 * self.rng.randint(0, 63))
            ops.append((text, cat))
        return Straight(ops)

    def cond(self, depth):
        rng = self.rng
        if depth and rng.random() < 0.5:
            return Cond(f"loop:{rng.randrange(depth)}", rng.choice(list(_CMPS)), rng.randint(0, 8))
        if self.params and rng.random() < 0.5:
            name = rng.choice(sorted(self.params))
        else:
            name = f"c{len(self.params)}"
            self.params[name] = rng.randint(0, 16)
        return Cond(f"param:{name}", rng.choice(list(_CMPS)), rng.randint(0, 16))

    def seq(self, depth, outer_trips):
        items = []
        for _ in range(self.rng.randint(1, 3)):
            roll = self.rng.random()
            self.statements += 1
            if roll < 0.3 and depth < self.max_depth and self.statements < 12:
                items.append(self.loop(depth, outer_trips))
            elif roll < 0.5 and self.statements < 14:
                orelse = self.seq_leafish(depth, outer_trips) if self.rng.random() < 0.6 else None
                items.append(If(self.cond(depth), self.seq_leafish(depth, outer_trips), orelse))
            elif roll < 0.6:
                text, cat = self.rng.choice(_STRAIGHT_OPS[:11])
                text = text.format(k=self.rng.randint(1, 9), o=4 * self.rng.randint(0, 63))
                items.append(GuardedOp(self.cond(depth), self.rng.random() < 0.5, (text, cat)))
            else:
                items.append(self.straight())
        return items

    def seq_leafish(self, depth, outer_trips):
        if depth < self.max_depth and self.rng.random() < 0.25 and self.statements < 12:
            return [self.loop(depth, outer_trips)]
        return [self.straight()] if self.rng.random() < 0.7 else self.seq(depth, outer_trips)

    def loop(self, depth, outer_trips):
        cap = max(1, min(64, self.trip_budget // outer_trips))
        trips = self.rng.randint(1, cap)
        if self.rng.random() < 0.4:
            bound = f"n{len(self.params)}"
            self.params[bound] = trips
        else:
            bound = trips
        body = self.seq(depth + 1, outer_trips * trips)
        return Loop(bound, body, bottom_tested=self.rng.random() < 0.3)


def generate_program(rng: random.Random, name: str, max_depth: int = 3,
                     trip_budget: int = 2048) -> GenProgram:
    """Random structured program: loops nest at most ``max_depth`` deep.

    Trip counts lie in 1..64; ``trip_budget`` caps the product of trip counts
    along any nesting path so generated kernels stay desk-scale.
    """
    builder = _Builder(rng, max_depth, trip_budget)
    body = builder.seq(0, 1)
    grid = (rng.randint(1, 64), rng.randint(1, 4), 1)
    block = (rng.choice([32, 64, 128, 256]), 1, 1)
    bindings = {"buf": 0, **builder.params}
    launch = LaunchConfig(grid=grid, block=block, param_bindings=bindings)
    return GenProgram(name, body, dict(builder.params), launch)


def _walk(node, fn):
    if isinstance(node, list):
        for item in node:
            _walk(item, fn)
        return
    fn(node)
    if isinstance(node, If):
        _walk(node.then, fn)
        if node.orelse is not None:
            _walk(node.orelse, fn)
    elif isinstance(node, Loop):
        _walk(node.body, fn)


def loop_count(prog: GenProgram) -> int:
    loops = []
    _walk(prog.body, lambda n: loops.append(n) if isinstance(n, Loop) else None)
    return len(loops)


# -- ground truth by construction ---------------------------------------------

def expected_counts(prog: GenProgram) -> Counter:
    """Dynamic per-thread counts implied by the program tree."""
    counts = Counter()
    counts[OpCategory.Load] += 1 + len(_param_loads(prog))  # buffer pointer + bound params
    counts[OpCategory.Move] += 3  # scratch initialisation
    _count_seq(prog.body, prog.params, [], counts)
    counts[OpCategory.Return] += 1
    return counts


def _param_loads(prog):
    return sorted(prog.params)


def _cond_value(cond: Cond, params, induction):
    kind, ref = cond.source.split(":")
    value = params[ref] if kind == "param" else induction[int(ref)]
    return _CMPS[cond.cmp](value, cond.imm)


def _count_seq(seq, params, induction, counts):
    for node in seq:
        if isinstance(node, Straight):
            for _, cat in node.ops:
                counts[cat] += 1
        elif isinstance(node, GuardedOp):
            counts[OpCategory.SetPred] += 1
            holds = _cond_value(node.cond, params, induction)
            if holds != node.negated:
                counts[node.op[1]] += 1
        elif isinstance(node, If):
            counts[OpCategory.SetPred] += 1
            if _cond_value(node.cond, params, induction):
                # guard true: jump over the then-arm
                counts[OpCategory.Branch] += 1
                if node.orelse is not None:
                    _count_seq(node.orelse, params, induction, counts)
            else:
                _count_seq(node.then, params, induction, counts)
                if node.orelse is not None:
                    counts[OpCategory.Branch] += 1  # jump over the else-arm
        elif isinstance(node, Loop):
            trips = params[node.bound] if isinstance(node.bound, str) else node.bound
            counts[OpCategory.Move] += 1  # induction init
            for i in range(trips):
                _count_seq(node.body, params, induction + [i], counts)
            counts[OpCategory.IntArith] += trips
            if node.bottom_tested:
                counts[OpCategory.SetPred] += trips
                counts[OpCategory.Branch] += trips - 1
            else:
                counts[OpCategory.SetPred] += trips + 1
                counts[OpCategory.Branch] += trips + 1


# -- rendering ----------------------------------------------------------------

class _Emitter:
    def __init__(self, prog: GenProgram):
        self.prog = prog
        self.lines = []
        self.labels = 0
        self.preds = 0
        self.depth_regs = 0

    def label(self, stem):
        self.labels += 1
        return f"${stem}_{self.labels}"

    def pred(self):
        self.preds += 1
        return f"%p{self.preds - 1}"

    def cond_operand(self, cond, induction_regs):
        kind, ref = cond.source.split(":")
        if kind == "param":
            return f"%rp_{ref}"
        return induction_regs[int(ref)]

    def emit(self, text):
        self.lines.append("\t" + text)

    def seq(self, seq, induction_regs):
        for node in seq:
            if isinstance(node, Straight):
                for text, _ in node.ops:
                    self.emit(text)
            elif isinstance(node, GuardedOp):
                p = self.pred()
                src = self.cond_operand(node.cond, induction_regs)
                self.emit(f"setp.{node.cond.cmp}.s32 {p}, {src}, {node.cond.imm};")
                self.emit(f"@{'!' if node.negated else ''}{p} {node.op[0]}")
            elif isinstance(node, If):
                p = self.pred()
                src = self.cond_operand(node.cond, induction_regs)
                else_label = self.label("ELSE")
                end_label = self.label("ENDIF")
                self.emit(f"setp.{node.cond.cmp}.s32 {p}, {src}, {node.cond.imm};")
                self.emit(f"@{p} bra {else_label if node.orelse is not None else end_label};")
                self.seq(node.then, induction_regs)
                if node.orelse is not None:
                    self.emit(f"bra {end_label};")
                    self.lines.append(f"{else_label}:")
                    self.seq(node.orelse, induction_regs)
                self.lines.append(f"{end_label}:")
            elif isinstance(node, Loop):
                reg = f"%ri{self.depth_regs}"
                self.depth_regs += 1
                bound = f"%rp_{node.bound}" if isinstance(node.bound, str) else str(node.bound)
                p = self.pred()
                regs = induction_regs + [reg]
                self.emit(f"mov.u32 {reg}, 0;")
                if node.bottom_tested:
                    body_label = self.label("LOOP")
                    self.lines.append(f"{body_label}:")
                    self.seq(node.body, regs)
                    self.emit(f"add.s32 {reg}, {reg}, 1;")
                    self.emit(f"setp.lt.s32 {p}, {reg}, {bound};")
                    self.emit(f"@{p} bra {body_label};")
                else:
                    head = self.label("HEAD")
                    exit_label = self.label("EXIT")
                    self.lines.append(f"{head}:")
                    self.emit(f"setp.ge.s32 {p}, {reg}, {bound};")
                    self.emit(f"@{p} bra {exit_label};")
                    self.seq(node.body, regs)
                    self.emit(f"add.s32 {reg}, {reg}, 1;")
                    self.emit(f"bra {head};")
                    self.lines.append(f"{exit_label}:")


def render_ptx(prog: GenProgram) -> str:
    em = _Emitter(prog)
    em.seq(prog.body, [])
    params = _param_loads(prog)
    launch = prog.launch
    binds = " ".join(f"{k}={v}" for k, v in sorted(launch.param_bindings.items()))
    out = [
        f"// generated kernel {prog.name}",
        "// @launch grid={} block={}".format(",".join(map(str, launch.grid)),
                                            ",".join(map(str, launch.block))),
        f"// @bind {binds}",
        ".version 7.0",
        ".target sm_70",
        ".address_size 64",
        "",
        f".visible .entry {prog.name}(",
        ",\n".join(["\t.param .u64 buf"] + [f"\t.param .u32 {p}" for p in params]),
        ")",
        "{",
        f"\t.reg .pred %p<{max(em.preds, 1)}>;",
        "\t.reg .b32 %r<2>;",
        "\t.reg .f32 %f<2>;",
        "\t.reg .b64 %rd<1>;",
    ]
    if em.depth_regs:
        out.append(f"\t.reg .b32 %ri<{em.depth_regs}>;")
    for p in params:
        out.append(f"\t.reg .b32 %rp_{p};")
    out.append("\tld.param.u64 %rd0, [buf];")
    for p in params:
        out.append(f"\tld.param.u32 %rp_{p}, [{p}];")
    out.append("\tmov.u32 %r0, 1;")
    out.append("\tmov.f32 %f0, 0f3F800000;")
    out.append("\tmov.f32 %f1, 0f00000000;")
    out.extend(em.lines)
    out.append("\tret;")
    out.append("}")
    return "\n".join(out) + "\n"


def sidecar(prog: GenProgram, seed: int, index: int) -> dict:
    counts = expected_counts(prog)
    return {
        "kernel": prog.name,
        "seed": seed,
        "index": index,
        "while_count": loop_count(prog),
        "bindings": dict(sorted(prog.launch.param_bindings.items())),
        "launch": {"grid": list(prog.launch.grid), "block": list(prog.launch.block)},
        "expected": {
            "counts": {cat.value: counts[cat] for cat in CATEGORY_ORDER},
            "total": sum(counts.values()),
        },
    }


def gen_corpus(seed: int, count: int, out_dir) -> list:
    """Write ``count`` generated kernels plus JSON sidecars; return the written paths."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    written = []
    for i in range(count):
        name = f"gen_{seed}_{i:03d}"
        prog = generate_program(rng, name)
        ptx_path = out / f"{name}.ptx"
        json_path = out / f"{name}.json"
        ptx_path.write_text(render_ptx(prog), encoding="utf-8")
        json_path.write_text(json.dumps(sidecar(prog, seed, i), indent=2) + "\n", encoding="utf-8")
        written.extend([ptx_path, json_path])
    return written


def launch_from_sidecar(data: dict) -> LaunchConfig:
    return LaunchConfig(grid=tuple(data["launch"]["grid"]), block=tuple(data["launch"]["block"]),
                        param_bindings=dict(data["bindings"]))
