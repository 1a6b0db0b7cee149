"""Command line entry point: ``gpe <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 input/data error, 3 internal invariant
failure. Errors are printed to stderr as ``error_code: message``.
"""

from __future__ import annotations

import argparse
import csv
import difflib
import hashlib
import io
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from gpe import SCHEMA_VERSION, __version__
from gpe.errors import GpeError, InputError, InvariantError, SchemaMismatch

COMMANDS = ("parse", "cfg", "analyze", "features", "train", "predict", "evaluate", "sweep",
            "rank", "gen-corpus", "gen-data")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _triple(text):
    try:
        parts = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X[,Y[,Z]] integers, got {text!r}") from None
    if not 1 <= len(parts) <= 3:
        raise argparse.ArgumentTypeError(f"expected 1 to 3 extents, got {text!r}")
    return tuple(parts + [1] * (3 - len(parts)))


def _binding(text):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name, int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"binding value must be an integer: {text!r}") from None


def default_seed() -> int:
    value = os.environ.get("GPE_SEED")
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise InputError(f"GPE_SEED must be an integer, got {value!r}") from None


# -- manifest -------------------------------------------------------------------

def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(value):
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


def write_manifest(out_path, args, inputs):
    options = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("func",)}
    manifest = {
        "toolVersion": __version__,
        "schemaVersion": SCHEMA_VERSION,
        "subcommand": args.command,
        "options": options,
        "inputs": {str(p): _digest(p) for p in inputs if p is not None},
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    target = Path(str(out_path).rstrip("/") + ".manifest.json")
    target.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target


def _emit(text: str, out, args, inputs):
    """Write ``text`` to ``out`` (plus a manifest) or to stdout."""
    if out:
        Path(out).write_text(text, encoding="utf-8")
        write_manifest(out, args, inputs)
    else:
        sys.stdout.write(text)


# -- PTX commands -----------------------------------------------------------------

def _load_kernel(args):
    from gpe.ptx import parse

    text = Path(args.file).read_text(encoding="utf-8")
    program = parse(text, strict=not getattr(args, "lenient", False))
    return text, program, program.kernel(args.kernel)


def cmd_parse(args):
    from gpe.ptx import format_program, parse, program_to_json

    text = Path(args.file).read_text(encoding="utf-8")
    program = parse(text, strict=not args.lenient)
    for w in program.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.format == "ptx":
        out = format_program(program)
    else:
        out = json.dumps(program_to_json(program, args.kernel), indent=2) + "\n"
    _emit(out, args.out, args, [args.file])


def cmd_cfg(args):
    from gpe.cfg import build_cfg, dominators, find_loops, to_dot, verify_dominators

    _, _, kernel = _load_kernel(args)
    cfg = build_cfg(kernel)
    dom = dominators(cfg)
    if args.verify and not verify_dominators(cfg, dom, max_blocks=10**9):
        raise InvariantError("dominator tree disagrees with the set-based reference")
    loops = find_loops(cfg, dom)
    _emit(to_dot(cfg, loops, kernel, kernel.name), args.out, args, [args.file])


def _launch_for(args, text):
    from gpe.corpus import launch_from_header
    from gpe.hypa import LaunchConfig

    header = launch_from_header(text)
    bindings = dict(header.param_bindings)
    bindings.update(dict(args.bind or []))
    return LaunchConfig(grid=args.grid or header.grid, block=args.block or header.block,
                        param_bindings=bindings,
                        representative_thread=(args.tid, args.ctaid))


def cmd_analyze(args):
    from gpe.hypa import AnalysisConfig, BranchPolicy, analyze_kernel, interpret, scale_to_launch

    text, _, kernel = _load_kernel(args)
    launch = _launch_for(args, text)
    if args.oracle:
        mix = interpret(kernel, launch)
    else:
        config = AnalysisConfig(max_trip_count=args.max_trips,
                                branch_policy=BranchPolicy(args.branch_policy),
                                strict_opcodes=not args.lenient)
        mix = analyze_kernel(kernel, launch, config)
    if args.scale:
        mix = scale_to_launch(mix, launch)
    if args.csv:
        data = mix.to_json()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["kernel", "perThread"] + list(data["counts"]) + ["total"])
        writer.writerow([data["kernel"], str(data["perThread"]).lower()]
                        + list(data["counts"].values()) + [data["total"]])
        text = buf.getvalue()
    else:
        text = json.dumps(mix.to_json(), indent=2) + "\n"
    _emit(text, args.out, args, [args.file])


# -- workload / predictors ------------------------------------------------------------

def _gpu(args):
    from gpe.workload import load_gpu_db

    gpus = load_gpu_db(args.gpu_db)
    if args.gpu not in gpus:
        close = difflib.get_close_matches(args.gpu, list(gpus), n=1)
        hint = f"; did you mean {close[0]!r}?" if close else ""
        raise InputError(f"GPU {args.gpu!r} not in database{hint}")
    return gpus[args.gpu]


def cmd_features(args):
    from gpe.hypa import InstructionMix
    from gpe.workload import extract_features, load_network

    net = load_network(args.net)
    mix = None
    if args.mix:
        mix = InstructionMix.from_json(json.loads(Path(args.mix).read_text(encoding="utf-8")))
    fv = extract_features(net, _gpu(args), args.clock, mix, allow_any_clock=args.allow_any_clock)
    _emit(fv.to_csv(), args.out, args, [args.net, args.gpu_db, args.mix])


def _spec_from_train_args(args):
    from gpe.predictors import ModelSpec

    overrides = {}
    if args.model == "knn":
        overrides["k"] = args.k
    if args.model in ("tree", "forest"):
        overrides.update(maxDepth=args.depth, minSamplesLeaf=args.min_leaf)
    if args.model == "forest":
        overrides.update(trees=args.trees, featuresPerSplit=args.features_per_split,
                         bootstrap=not args.no_bootstrap)
    return ModelSpec.make(args.model, args.log_target, **overrides)


def cmd_train(args):
    from gpe.predictors import load_dataset, save_model, train

    data = load_dataset(args.data)
    model = train(data, _spec_from_train_args(args), args.seed, args.threads)
    save_model(model, args.out)
    write_manifest(args.out, args, [args.data])


def cmd_predict(args):
    from gpe.predictors import load_model
    from gpe.predictors.dataset import read_table

    model = load_model(args.model)
    header, table = read_table(Path(args.features).read_text(encoding="utf-8"), args.features)
    names = tuple(model.feature_names)
    if header[: len(names)] != names or len(header) > len(names) + 1:
        raise SchemaMismatch(f"{args.features}: header does not match the model's "
                             f"{len(names)}-feature schema")
    preds = model.predict(table[:, : len(names)]) if len(table) else np.zeros(0)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"predicted_{model.target_name}"])
    for p in preds:
        writer.writerow([repr(float(p))])
    _emit(buf.getvalue(), args.out, args, [args.model, args.features])


def cmd_evaluate(args):
    from gpe.predictors import ModelSpec, load_dataset, select_best

    data = load_dataset(args.data)
    specs = [ModelSpec.parse(s) for s in (args.model_spec or ["forest"])]
    best, best_metrics, results = select_best(data, specs, args.folds, args.seed, args.threads)
    report = {
        "folds": args.folds,
        "seed": args.seed,
        "target": data.target_name,
        "candidates": [{"spec": str(s), **m.to_json()} for s, m in results],
        "best": {"spec": str(best), **best_metrics.to_json()},
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out, args, [args.data])


# -- DSE ---------------------------------------------------------------------------------

def cmd_sweep(args):
    from gpe.dse import emit_sweep_csv, parse_clocks, sweep_frequencies
    from gpe.predictors import load_model
    from gpe.workload import load_network

    net = load_network(args.net)
    rows = sweep_frequencies(net, _gpu(args), parse_clocks(args.clocks),
                             load_model(args.power_model), load_model(args.cycle_model),
                             allow_any_clock=args.allow_any_clock)
    _emit(emit_sweep_csv(rows), args.out, args,
          [args.net, args.gpu_db, args.power_model, args.cycle_model])


def cmd_rank(args):
    from gpe.dse import (Constraint, Objective, emit_ranking_csv, format_ranking, load_candidates,
                         rank_candidates)
    from gpe.predictors import load_model
    from gpe.workload import load_gpu_db, load_network

    net = load_network(args.net)
    gpus = load_gpu_db(args.gpu_db)
    candidates = load_candidates(Path(args.candidates).read_text(encoding="utf-8"), gpus)
    constraint = Constraint(args.max_power, args.max_cycles, Objective(args.objective))
    entries = rank_candidates(net, candidates, constraint, load_model(args.power_model),
                              load_model(args.cycle_model), allow_any_clock=args.allow_any_clock)
    sys.stdout.write(format_ranking(entries))
    if args.out:
        Path(args.out).write_text(emit_ranking_csv(entries), encoding="utf-8")
        write_manifest(args.out, args, [args.net, args.gpu_db, args.candidates,
                                        args.power_model, args.cycle_model])


# -- generators ---------------------------------------------------------------------------

def cmd_gen_corpus(args):
    from gpe.corpus import gen_corpus

    if args.count < 1:
        raise UsageError("gen-corpus: --count must be >= 1")
    written = gen_corpus(args.seed, args.count, args.out_dir)
    write_manifest(args.out_dir, args, [])
    print(f"wrote {len(written) // 2} kernels to {args.out_dir}")


def cmd_gen_data(args):
    from gpe.synth import power_dataset

    data = power_dataset(args.samples, args.seed, args.noise, target=args.target)
    _emit(data.to_csv(), args.out, args, [])


# -- argument parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gpe", description="Early design-stage GPU power and performance estimation.")
    p.add_argument("--version", action="version", version=f"gpe {__version__}")
    p.add_argument("--threads", type=int, default=0,
                   help="cap on worker threads (default: hardware count)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    def kernel_args(sp):
        sp.add_argument("file", help="PTX source file")
        sp.add_argument("--kernel", help="kernel name (default: the only/first kernel)")
        sp.add_argument("--lenient", action="store_true", help="accept unknown opcodes as Other")
        sp.add_argument("--out")

    sp = sub.add_parser("parse", help="parse PTX and print its syntax tree")
    kernel_args(sp)
    sp.add_argument("--format", choices=("json", "ptx"), default="json")
    sp.add_argument("--dump-json", dest="format", action="store_const", const="json",
                    help="emit the typed representation as JSON (the default)")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("cfg", help="emit the control flow graph as DOT")
    kernel_args(sp)
    sp.add_argument("--dot", dest="out", help="write DOT to this file (same as --out)")
    sp.add_argument("--verify", action="store_true", help="cross-check dominators")
    sp.set_defaults(func=cmd_cfg)

    sp = sub.add_parser("analyze", help="dynamic instruction mix of one kernel")
    kernel_args(sp)
    sp.add_argument("--grid", type=_triple)
    sp.add_argument("--block", type=_triple)
    sp.add_argument("--tid", type=_triple, default=(0, 0, 0), help="representative thread id")
    sp.add_argument("--ctaid", type=_triple, default=(0, 0, 0), help="representative block id")
    sp.add_argument("--bind", type=_binding, action="append", metavar="NAME=VALUE")
    sp.add_argument("--branch-policy", choices=("fail", "taken", "not-taken"), default="fail")
    sp.add_argument("--max-trips", type=int, default=2**20)
    sp.add_argument("--scale", action="store_true", help="multiply by the launch thread count")
    sp.add_argument("--per-thread", dest="scale", action="store_false",
                    help="report one representative thread (the default)")
    fmt = sp.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="csv", action="store_false", help="JSON output (default)")
    fmt.add_argument("--csv", dest="csv", action="store_true", help="one CSV row with header")
    sp.add_argument("--oracle", action="store_true", help="use the reference interpreter")
    sp.set_defaults(func=cmd_analyze, csv=False)

    def hw_args(sp):
        sp.add_argument("--net", required=True)
        sp.add_argument("--gpu-db", default=None, help="GPU CSV (default: bundled database)")
        sp.add_argument("--allow-any-clock", action="store_true")

    sp = sub.add_parser("features", help="one feature row for a network on a GPU")
    hw_args(sp)
    sp.add_argument("--gpu", required=True)
    sp.add_argument("--clock", type=int, required=True)
    sp.add_argument("--mix", help="instruction mix JSON from analyze")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_features)

    sp = sub.add_parser("train", help="fit a model on a dataset CSV")
    sp.add_argument("--data", required=True)
    sp.add_argument("--model", choices=("knn", "tree", "forest", "mean"), required=True)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--trees", type=int, default=100)
    sp.add_argument("--depth", type=int, default=16)
    sp.add_argument("--min-leaf", type=int, default=2)
    sp.add_argument("--features-per-split", type=int, default=0, help="0 means ceil(sqrt(d))")
    sp.add_argument("--no-bootstrap", action="store_true")
    sp.add_argument("--log-target", action="store_true")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="predict targets for a feature CSV")
    sp.add_argument("--model", required=True)
    sp.add_argument("--features", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("evaluate", help="k-fold cross-validation and model selection")
    sp.add_argument("--data", required=True)
    sp.add_argument("--model-spec", action="append",
                    help="kind[:name=value,...]; repeat to compare candidates")
    sp.add_argument("--folds", type=int, default=5)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("sweep", help="predicted power and cycles across clocks")
    hw_args(sp)
    sp.add_argument("--gpu", required=True)
    sp.add_argument("--clocks", required=True, help="START:STOP:STEP or a comma list")
    sp.add_argument("--power-model", required=True)
    sp.add_argument("--cycle-model", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("rank", help="rank candidate GPUs under constraints")
    hw_args(sp)
    sp.add_argument("--candidates", required=True, help="CSV with columns gpu,clock_mhz")
    sp.add_argument("--max-power", type=float)
    sp.add_argument("--max-cycles", type=float)
    sp.add_argument("--objective", choices=("power", "cycles", "energy"), default="energy")
    sp.add_argument("--power-model", required=True)
    sp.add_argument("--cycle-model", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_rank)

    sp = sub.add_parser("gen-corpus", help="generate random PTX kernels with ground truth")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--count", type=int, default=50)
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_gen_corpus)

    sp = sub.add_parser("gen-data", help="generate a synthetic training dataset")
    sp.add_argument("--samples", type=int, default=500)
    sp.add_argument("--target", choices=("power_w", "cycles"), default="power_w")
    sp.add_argument("--noise", type=float, default=0.03)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen_data)
    return p


def _first_command(argv):
    skip = False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--threads":
            skip = True
            continue
        if not tok.startswith("-"):
            return tok
    return None


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    cmd = _first_command(argv)
    if cmd is not None and cmd not in COMMANDS:
        close = difflib.get_close_matches(cmd, COMMANDS, n=1)
        hint = f"; did you mean '{close[0]}'?" if close else ""
        print(f"usage_error: unknown subcommand '{cmd}'{hint}", file=sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"usage_error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --version / --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = default_seed()
        args.func(args)
    except UsageError as exc:
        print(f"usage_error: {exc}", file=sys.stderr)
        return 1
    except GpeError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"io_error: {exc}", file=sys.stderr)
        return 2
    except (InputError, ValueError) as exc:
        print(f"input_error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report, never traceback
        print(f"internal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
