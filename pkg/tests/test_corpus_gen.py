import json
import random

from gpe.corpus import (
    Loop,
    Straight,
    GenProgram,
    expected_counts,
    gen_corpus,
    generate_program,
    launch_from_sidecar,
    render_ptx,
)
from gpe.hypa import LaunchConfig, analyze_kernel, interpret
from gpe.ptx import CATEGORY_ORDER, OpCategory, parse


def test_same_seed_same_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    gen_corpus(11, 5, a)
    gen_corpus(11, 5, b)
    for fa in sorted(a.iterdir()):
        assert fa.read_bytes() == (b / fa.name).read_bytes()


def test_count_one_writes_one_pair(tmp_path):
    gen_corpus(3, 1, tmp_path)
    assert len(list(tmp_path.glob("*.ptx"))) == 1
    assert len(list(tmp_path.glob("*.json"))) == 1


def test_sidecar_matches_oracle(generated_dir):
    for side in sorted(generated_dir.glob("*.json"))[:10]:
        data = json.loads(side.read_text())
        k = parse(side.with_suffix(".ptx").read_text()).kernels[0]
        mix = interpret(k, launch_from_sidecar(data))
        assert mix.total == data["expected"]["total"]
        assert {c.value: mix.counts[c] for c in CATEGORY_ORDER} == data["expected"]["counts"]


def test_generator_respects_limits():
    rng = random.Random(5)

    def depth(nodes, d=0):
        best = d
        for n in nodes:
            if isinstance(n, Loop):
                trips = n.bound if isinstance(n.bound, int) else None
                assert trips is None or 1 <= trips <= 64
                best = max(best, depth(n.body, d + 1))
            elif hasattr(n, "then"):
                best = max(best, depth(n.then, d), depth(n.orelse or [], d))
        return best

    for i in range(100):
        prog = generate_program(rng, f"g{i}")
        assert depth(prog.body) <= 3
        assert all(1 <= v <= 64 for k, v in prog.params.items() if k.startswith("n"))


def single_loop(bound, body_ops):
    return GenProgram("one", [Loop(bound, [Straight(body_ops)])], {}, LaunchConfig(
        param_bindings={"buf": 0}))


def test_monotonic_in_loop_bound():
    rng = random.Random(9)
    from gpe.corpus import _STRAIGHT_OPS

    for _ in range(20):
        ops = [(t.format(k=3, o=8), c) for t, c in rng.sample(_STRAIGHT_OPS, rng.randint(1, 6))]
        per_trip = len(ops) + 3  # body, induction add, setp, back branch
        totals = []
        for bound in range(1, 6):
            prog = single_loop(bound, ops)
            k = parse(render_ptx(prog)).kernels[0]
            totals.append(analyze_kernel(k, prog.launch).total)
            assert totals[-1] == sum(expected_counts(prog).values())
        assert all(b - a == per_trip for a, b in zip(totals, totals[1:]))


def test_expected_counts_have_prelude():
    prog = single_loop(1, [("bar.sync 0;", OpCategory.Sync)])
    c = expected_counts(prog)
    assert c[OpCategory.Return] == 1 and c[OpCategory.Sync] == 1


def test_generated_header_matches_sidecar(generated_dir):
    from gpe.corpus import launch_from_header, launch_from_sidecar

    for ptx in sorted(generated_dir.glob("*.ptx"))[:10]:
        side = json.loads(ptx.with_suffix(".json").read_text())
        assert launch_from_header(ptx.read_text()) == launch_from_sidecar(side)
