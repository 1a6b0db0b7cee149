"""Basic-block control flow graphs, dominators and natural loops."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from gpe.errors import IrreducibleControlFlow
from gpe.ptx.ast import KernelDef


class TermKind(str, Enum):
    FallThrough = "FallThrough"
    UncondBranch = "UncondBranch"
    CondBranch = "CondBranch"
    Exit = "Exit"
    CondExit = "CondExit"  # guarded ret/exit: leaves the kernel or falls through


@dataclass(frozen=True)
class Terminator:
    kind: TermKind
    target: Optional[int] = None  # taken successor (UncondBranch, CondBranch)
    fallthrough: Optional[int] = None  # FallThrough, CondBranch, CondExit
    guard: Optional[str] = None
    negated: bool = False


@dataclass(frozen=True)
class BasicBlock:
    id: int
    first: int
    last: int  # inclusive; last == first - 1 for the synthetic empty entry block
    terminator: Terminator
    reachable: bool = True

    @property
    def indices(self):
        return range(self.first, self.last + 1)

    def __len__(self):
        return self.last - self.first + 1


@dataclass
class Cfg:
    blocks: list
    entry: int
    edges: list
    succs: dict = field(default_factory=dict)
    preds: dict = field(default_factory=dict)

    def block_of(self, index: int) -> BasicBlock:
        for b in self.blocks:
            if b.first <= index <= b.last:
                return b
        raise KeyError(index)

    def reachable(self):
        return [b.id for b in self.blocks if b.reachable]


@dataclass(frozen=True)
class DominatorTree:
    idom: dict

    def dominates(self, a: int, b: int) -> bool:
        """True if block ``a`` dominates block ``b``."""
        if b not in self.idom:
            return False
        while True:
            if a == b:
                return True
            parent = self.idom[b]
            if parent == b:
                return False
            b = parent


@dataclass(frozen=True)
class Loop:
    header: int
    back_edge: tuple
    body: frozenset
    exit_edges: tuple

    @property
    def latch(self) -> int:
        return self.back_edge[0]


def build_cfg(kernel: KernelDef) -> Cfg:
    """Partition the kernel body into basic blocks and connect them."""
    body = kernel.body
    n = len(body)
    if n == 0:
        return Cfg(blocks=[BasicBlock(0, 0, -1, Terminator(TermKind.Exit))], entry=0,
                   edges=[], succs={0: []}, preds={0: []})
    leaders = {0}
    leaders.update(idx for idx in kernel.labels.values() if idx < n)
    for ins in body:
        if (ins.is_branch or ins.is_exit) and ins.index + 1 < n:
            leaders.add(ins.index + 1)
    starts = sorted(leaders)

    # An entry block must have no predecessors; if instruction 0 is itself a
    # branch target, an empty synthetic block is placed in front of it.
    targeted = {kernel.labels[ins.label] for ins in body if ins.is_branch}
    offset = 1 if 0 in targeted else 0
    block_at = {start: i + offset for i, start in enumerate(starts)}

    def block_for(index):
        return block_at.get(index)  # None: branch to end of body, i.e. kernel exit

    blocks = []
    if offset:
        blocks.append(BasicBlock(0, 0, -1, Terminator(TermKind.FallThrough, fallthrough=1)))
    for i, start in enumerate(starts):
        end = (starts[i + 1] if i + 1 < len(starts) else n) - 1
        last = body[end]
        nxt = block_for(end + 1)
        if last.is_branch:
            target = block_for(kernel.labels[last.label])
            if last.guard is None:
                term = (Terminator(TermKind.Exit) if target is None
                        else Terminator(TermKind.UncondBranch, target=target))
            elif target is None:
                term = Terminator(TermKind.CondExit, fallthrough=nxt,
                                  guard=last.guard.register, negated=last.guard.negated)
            else:
                term = Terminator(TermKind.CondBranch, target=target, fallthrough=nxt,
                                  guard=last.guard.register, negated=last.guard.negated)
        elif last.is_exit:
            if last.guard is None:
                term = Terminator(TermKind.Exit)
            else:
                term = Terminator(TermKind.CondExit, fallthrough=nxt,
                                  guard=last.guard.register, negated=last.guard.negated)
        elif nxt is None:
            term = Terminator(TermKind.Exit)  # falls off the end of the body
        else:
            term = Terminator(TermKind.FallThrough, fallthrough=nxt)
        blocks.append(BasicBlock(i + offset, start, end, term))

    succs = {b.id: [] for b in blocks}
    preds = {b.id: [] for b in blocks}
    edges = []
    for b in blocks:
        t = b.terminator
        for s in (t.target, t.fallthrough):
            if s is not None and s not in succs[b.id]:
                succs[b.id].append(s)
                preds[s].append(b.id)
                edges.append((b.id, s))

    seen = set()
    if blocks:
        stack = [0]
        while stack:
            b = stack.pop()
            if b in seen:
                continue
            seen.add(b)
            stack.extend(succs[b])
    blocks = [BasicBlock(b.id, b.first, b.last, b.terminator, b.id in seen) for b in blocks]
    return Cfg(blocks=blocks, entry=0, edges=edges, succs=succs, preds=preds)


def _reverse_postorder(cfg: Cfg):
    order = []
    seen = set()
    # iterative DFS that emits postorder
    stack = [(cfg.entry, iter(cfg.succs[cfg.entry]))]
    seen.add(cfg.entry)
    while stack:
        node, it = stack[-1]
        for s in it:
            if s not in seen:
                seen.add(s)
                stack.append((s, iter(cfg.succs[s])))
                break
        else:
            stack.pop()
            order.append(node)
    order.reverse()
    return order


def dominators(cfg: Cfg) -> DominatorTree:
    """Immediate dominators of reachable blocks (Cooper, Harvey & Kennedy)."""
    if not cfg.blocks:
        return DominatorTree({})
    rpo = _reverse_postorder(cfg)
    rank = {b: i for i, b in enumerate(rpo)}
    idom = {cfg.entry: cfg.entry}

    def intersect(a, b):
        while a != b:
            while rank[a] > rank[b]:
                a = idom[a]
            while rank[b] > rank[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for b in rpo[1:]:
            processed = [p for p in cfg.preds[b] if p in idom]
            new = processed[0]
            for p in processed[1:]:
                new = intersect(p, new)
            if idom.get(b) != new:
                idom[b] = new
                changed = True
    return DominatorTree(idom)


def dominator_sets(cfg: Cfg) -> dict:
    """Full dominator sets by the iterative set-intersection definition."""
    nodes = cfg.reachable()
    dom = {b: set(nodes) for b in nodes}
    dom[cfg.entry] = {cfg.entry}
    changed = True
    while changed:
        changed = False
        for b in nodes:
            if b == cfg.entry:
                continue
            preds = [p for p in cfg.preds[b] if p in dom]
            new = set.intersection(*(dom[p] for p in preds)) | {b}
            if new != dom[b]:
                dom[b] = new
                changed = True
    return dom


def verify_dominators(cfg: Cfg, tree: DominatorTree, max_blocks: int = 64) -> bool:
    """Cross-check ``tree`` against :func:`dominator_sets` on small graphs."""
    if len(cfg.blocks) > max_blocks:
        return True
    sets = dominator_sets(cfg)
    for b, doms in sets.items():
        chain = set()
        x = b
        while True:
            chain.add(x)
            if tree.idom[x] == x:
                break
            x = tree.idom[x]
        if chain != doms:
            return False
    return True


def find_loops(cfg: Cfg, dom: DominatorTree) -> list:
    """One natural loop per back edge, sorted by header (then latch).

    Raises IrreducibleControlFlow when a retreating edge is not a back edge.
    """
    loops = []
    for u, v in _retreating_edges(cfg):
        if not dom.dominates(v, u):
            raise IrreducibleControlFlow((u, v))
        body = {v, u}
        work = [u] if u != v else []
        while work:
            x = work.pop()
            for p in cfg.preds[x]:
                if p not in body and p in dom.idom:
                    body.add(p)
                    work.append(p)
        exits = tuple(sorted((a, s) for a in body for s in cfg.succs[a] if s not in body))
        loops.append(Loop(header=v, back_edge=(u, v), body=frozenset(body), exit_edges=exits))
    loops.sort(key=lambda lp: (lp.header, lp.latch))
    return loops


def _retreating_edges(cfg: Cfg):
    """Edges to a block currently on the DFS stack."""
    if not cfg.blocks:
        return []
    found = []
    on_stack = {cfg.entry}
    seen = {cfg.entry}
    stack = [(cfg.entry, iter(cfg.succs[cfg.entry]))]
    while stack:
        node, it = stack[-1]
        for s in it:
            if s in on_stack:
                found.append((node, s))
            elif s not in seen:
                seen.add(s)
                on_stack.add(s)
                stack.append((s, iter(cfg.succs[s])))
                break
        else:
            stack.pop()
            on_stack.discard(node)
    return found


def to_dot(cfg: Cfg, loops=(), kernel: Optional[KernelDef] = None, name: str = "cfg") -> str:
    headers = {lp.header for lp in loops}
    lines = [f'digraph "{name}" {{', "  node [shape=box];"]
    for b in cfg.blocks:
        label = f"B{b.id} [{b.first}..{b.last}]"
        if kernel is not None and len(b):
            label += "\\l" + "\\l".join(kernel.body[i].mnemonic for i in b.indices) + "\\l"
        attrs = [f'label="{label}"']
        if b.id in headers:
            attrs.append('xlabel="loop header"')
            attrs.append("peripheries=2")
        if not b.reachable:
            attrs.append("style=dashed")
        lines.append(f"  B{b.id} [{', '.join(attrs)}];")
    back = {lp.back_edge for lp in loops}
    for u, v in cfg.edges:
        style = " [style=bold, label=\"back\"]" if (u, v) in back else ""
        lines.append(f"  B{u} -> B{v}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"
