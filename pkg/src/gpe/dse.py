"""Design space exploration: frequency sweeps and constrained GPU ranking."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from gpe.errors import InputError
from gpe.predictors.model import check_schema
from gpe.workload import FEATURE_NAMES, GpuSpec, NetworkSpec, extract_features, network_stats


class Objective(str, Enum):
    MinPower = "power"
    MinCycles = "cycles"
    MinEnergyProxy = "energy"


@dataclass(frozen=True)
class Constraint:
    max_power_w: Optional[float] = None
    max_cycles: Optional[float] = None
    objective: Objective = Objective.MinEnergyProxy


@dataclass(frozen=True)
class Candidate:
    gpu: GpuSpec
    clock_mhz: int


@dataclass(frozen=True)
class RankedEntry:
    candidate: Candidate
    power_w: float
    cycles: float
    objective_value: float
    feasible: bool
    violation: Optional[str] = None


def energy_proxy(power_w: float, cycles: float, clock_mhz: float) -> float:
    """Joules, assuming the predicted cycles run at the set clock."""
    return power_w * (cycles / (clock_mhz * 1e6))


def objective_value(objective: Objective, power_w, cycles, clock_mhz) -> float:
    if objective is Objective.MinPower:
        return power_w
    if objective is Objective.MinCycles:
        return cycles
    return energy_proxy(power_w, cycles, clock_mhz)


def _predict_pair(rows, power_model, cycle_model):
    if not rows:
        return np.zeros(0), np.zeros(0)
    X = np.array(rows, dtype=float)
    for model in (power_model, cycle_model):
        if hasattr(model, "feature_names"):
            check_schema(model, FEATURE_NAMES)
    return np.asarray(power_model.predict(X), dtype=float), np.asarray(cycle_model.predict(X), dtype=float)


def sweep_frequencies(net: NetworkSpec, gpu: GpuSpec, clocks, power_model, cycle_model,
                      allow_any_clock: bool = False) -> list:
    """(clock, power, cycles) per requested clock, in input order."""
    stats = network_stats(net)
    rows = [extract_features(net, gpu, c, allow_any_clock=allow_any_clock, stats=stats).values
            for c in clocks]
    power, cycles = _predict_pair(rows, power_model, cycle_model)
    return [(int(c), float(p), float(n)) for c, p, n in zip(clocks, power, cycles)]


def rank_candidates(net: NetworkSpec, candidates, constraint: Constraint, power_model,
                    cycle_model, allow_any_clock: bool = False) -> list:
    """Feasible entries first, each group ascending by objective; ties keep input order."""
    candidates = list(candidates)
    stats = network_stats(net)
    rows = [extract_features(net, c.gpu, c.clock_mhz, allow_any_clock=allow_any_clock,
                             stats=stats).values for c in candidates]
    power, cycles = _predict_pair(rows, power_model, cycle_model)
    entries = []
    for cand, p, n in zip(candidates, power, cycles):
        p, n = float(p), float(n)
        violation = None
        if constraint.max_power_w is not None and p > constraint.max_power_w:
            violation = "maxPowerW"
        elif constraint.max_cycles is not None and n > constraint.max_cycles:
            violation = "maxCycles"
        value = objective_value(constraint.objective, p, n, cand.clock_mhz)
        entries.append(RankedEntry(cand, p, n, value, violation is None, violation))
    # sorted() is stable, so equal keys stay in input order
    return sorted(entries, key=lambda e: (not e.feasible, e.objective_value))


def parse_clocks(text: str) -> list:
    """``start:stop:step`` (inclusive stop) or a comma list."""
    try:
        if ":" in text:
            parts = [int(v) for v in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step <= 0:
                raise InputError("clock step must be positive")
            clocks = list(range(start, stop + 1, step))
            if clocks and clocks[-1] != stop:
                clocks.append(stop)
            return clocks
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"bad clock list {text!r}; use START:STOP:STEP or a comma list") from None


def _g(v: float) -> str:
    return repr(float(v))


def emit_sweep_csv(sweep) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["clock_mhz", "power_w", "cycles"])
    for clock, power, cycles in sweep:
        writer.writerow([clock, _g(power), _g(cycles)])
    return buf.getvalue()


def emit_ranking_csv(entries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "gpu", "clock_mhz", "power_w", "cycles", "objective", "feasible",
                     "violation"])
    for i, e in enumerate(entries, start=1):
        writer.writerow([i, e.candidate.gpu.name, e.candidate.clock_mhz, _g(e.power_w),
                         _g(e.cycles), _g(e.objective_value), "yes" if e.feasible else "no",
                         e.violation or ""])
    return buf.getvalue()


def format_ranking(entries) -> str:
    lines = [f"{'rank':>4}  {'gpu':<16} {'clock':>6} {'power_w':>10} {'cycles':>14} "
             f"{'objective':>12}  status"]
    for i, e in enumerate(entries, start=1):
        status = "ok" if e.feasible else f"infeasible ({e.violation})"
        lines.append(f"{i:>4}  {e.candidate.gpu.name:<16} {e.candidate.clock_mhz:>6} "
                     f"{e.power_w:>10.3f} {e.cycles:>14.1f} {e.objective_value:>12.6g}  {status}")
    return "\n".join(lines) + "\n"


def load_candidates(text: str, gpus: dict) -> list:
    """CSV with columns gpu,clock_mhz."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != ["gpu", "clock_mhz"]:
        raise InputError("candidates CSV header must be gpu,clock_mhz")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        name = row[0].strip()
        if name not in gpus:
            raise InputError(f"candidates line {lineno}: unknown GPU {name!r}")
        try:
            out.append(Candidate(gpus[name], int(row[1])))
        except (ValueError, IndexError):
            raise InputError(f"candidates line {lineno}: bad clock") from None
    return out
