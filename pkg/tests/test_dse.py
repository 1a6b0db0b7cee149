import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpe.dse import (
    Candidate,
    Constraint,
    Objective,
    emit_ranking_csv,
    emit_sweep_csv,
    energy_proxy,
    load_candidates,
    parse_clocks,
    rank_candidates,
    sweep_frequencies,
)
from gpe.errors import ClockOutOfRange, InputError
from gpe.predictors.dataset import read_table
from gpe.workload import FEATURE_NAMES, load_gpu_db, load_network, network_dir

CLOCK = FEATURE_NAMES.index("clock_mhz")


class Const:
    def __init__(self, value):
        self.value = value

    def predict(self, X):
        return np.full(len(X), float(self.value))


class Linear:
    """Prediction proportional to the clock feature."""

    def __init__(self, slope, offset=0.0):
        self.slope, self.offset = slope, offset

    def predict(self, X):
        return self.offset + self.slope * np.asarray(X)[:, CLOCK]


class Table:
    """Looks up one value per row, in call order."""

    def __init__(self, values):
        self.values = list(values)

    def predict(self, X):
        assert len(X) == len(self.values)
        return np.array(self.values, dtype=float)


@pytest.fixture(scope="module")
def net():
    return load_network(network_dir() / "tiny_cnn.json")


@pytest.fixture(scope="module")
def gpus():
    return load_gpu_db()


def test_empty_sweep_and_ranking(net, gpus):
    assert sweep_frequencies(net, gpus["V100S"], [], Const(1), Const(1)) == []
    assert rank_candidates(net, [], Constraint(), Const(1), Const(1)) == []


def test_repeated_clock_gives_identical_rows(net, gpus):
    rows = sweep_frequencies(net, gpus["V100S"], [1000, 1000], Linear(0.1), Linear(2.0))
    assert rows[0] == rows[1] == (1000, 100.0, 2000.0)


def test_v100s_band(net, gpus):
    gpu = gpus["V100S"]
    rows = sweep_frequencies(net, gpu, [397, 1590], Linear(0.1), Const(5))
    assert [r[0] for r in rows] == [397, 1590]
    for bad in (396, 1591, 2000):
        with pytest.raises(ClockOutOfRange):
            sweep_frequencies(net, gpu, [bad], Const(1), Const(1))
    assert sweep_frequencies(net, gpu, [2000], Const(1), Const(1), allow_any_clock=True)


def test_sweep_preserves_input_order(net, gpus):
    clocks = [1500, 400, 900]
    rows = sweep_frequencies(net, gpus["V100S"], clocks, Linear(1.0), Const(1))
    assert [r[0] for r in rows] == clocks and [r[1] for r in rows] == clocks


def test_power_violation_marked(net, gpus):
    cands = [Candidate(gpus["T4"], 1000)]
    out = rank_candidates(net, cands, Constraint(max_power_w=300), Const(500), Const(1))
    assert not out[0].feasible and out[0].violation == "maxPowerW"
    out = rank_candidates(net, cands, Constraint(max_power_w=300, max_cycles=1), Const(500),
                          Const(10))
    assert out[0].violation == "maxPowerW"
    out = rank_candidates(net, cands, Constraint(max_cycles=1), Const(5), Const(10))
    assert out[0].violation == "maxCycles"


def test_energy_proxy():
    assert energy_proxy(100.0, 1e9, 1000) == pytest.approx(100.0)
    assert energy_proxy(50.0, 2e6, 2000) == pytest.approx(0.05)


def _candidates(gpus, clocks):
    names = sorted(gpus)
    out = []
    for i, c in enumerate(clocks):
        gpu = gpus[names[i % len(names)]]
        out.append(Candidate(gpu, gpu.base_mhz + c % (gpu.max_mhz - gpu.base_mhz + 1)))
    return out


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2000), st.floats(1, 400), st.floats(1, 1e6)),
                min_size=1, max_size=12),
       st.sampled_from(list(Objective)),
       st.one_of(st.none(), st.floats(1, 400)),
       st.one_of(st.none(), st.floats(1, 1e6)))
def test_ranking_properties(net, gpus, rows, objective, max_power, max_cycles):
    cands = _candidates(gpus, [r[0] for r in rows])
    power = [r[1] for r in rows]
    cycles = [r[2] for r in rows]
    cons = Constraint(max_power, max_cycles, objective)
    ranked = rank_candidates(net, cands, cons, Table(power), Table(cycles))
    assert len(ranked) == len(cands)
    # soundness of filtering
    for e in ranked:
        ok = (max_power is None or e.power_w <= max_power) and (
            max_cycles is None or e.cycles <= max_cycles)
        assert e.feasible == ok
    # feasible block first, each block ascending
    flags = [e.feasible for e in ranked]
    assert flags == sorted(flags, reverse=True)
    for a, b in zip(ranked, ranked[1:]):
        if a.feasible == b.feasible:
            assert a.objective_value <= b.objective_value
    # dominance: a feasible entry no worse on both axes ranks ahead
    pos = {id(e.candidate): i for i, e in enumerate(ranked)}
    for a in ranked:
        for b in ranked:
            if (a.feasible and b.feasible and a.candidate.clock_mhz == b.candidate.clock_mhz
                    and a.power_w < b.power_w and a.cycles < b.cycles):
                assert pos[id(a.candidate)] < pos[id(b.candidate)]


def test_ties_keep_input_order_under_permutation(net, gpus):
    cands = [Candidate(gpus[n], gpus[n].base_mhz) for n in sorted(gpus)]
    rng = np.random.default_rng(0)
    for _ in range(5):
        order = rng.permutation(len(cands))
        perm = [cands[i] for i in order]
        ranked = rank_candidates(net, perm, Constraint(objective=Objective.MinPower),
                                 Const(10), Const(10))
        assert [e.candidate for e in ranked] == perm


def test_csv_round_trip(net, gpus):
    rows = sweep_frequencies(net, gpus["V100S"], [397, 800, 1590], Linear(0.123), Linear(7.7))
    header, table = read_table(emit_sweep_csv(rows))
    assert list(header) == ["clock_mhz", "power_w", "cycles"]
    assert [tuple(r) for r in table.tolist()] == [(float(c), p, n) for c, p, n in rows]
    ranked = rank_candidates(net, _candidates(gpus, [1, 2, 3]), Constraint(max_power_w=1e9),
                             Const(3), Const(4))
    text = emit_ranking_csv(ranked)
    assert text.splitlines()[0].startswith("rank,gpu,clock_mhz")
    assert len(text.splitlines()) == 4


def test_parse_clocks():
    assert parse_clocks("397:1590:400") == [397, 797, 1197, 1590]
    assert parse_clocks("100:300:100") == [100, 200, 300]
    assert parse_clocks("500,600") == [500, 600]
    for bad in ("a:b", "1:2:0", "x"):
        with pytest.raises(InputError):
            parse_clocks(bad)


def test_load_candidates(gpus):
    cands = load_candidates("gpu,clock_mhz\nT4,900\nV100S,1200\n", gpus)
    assert [(c.gpu.name, c.clock_mhz) for c in cands] == [("T4", 900), ("V100S", 1200)]
    with pytest.raises(InputError):
        load_candidates("gpu,clock\nT4,1\n", gpus)
    with pytest.raises(InputError):
        load_candidates("gpu,clock_mhz\nH200,1\n", gpus)
