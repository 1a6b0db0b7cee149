import json
import subprocess
import sys

import pytest

from gpe import __version__
from gpe.cli import main
from gpe.corpus import corpus_dir
from gpe.workload import network_dir

NET = str(network_dir() / "tiny_cnn.json")
KERNEL = str(corpus_dir() / "relu.ptx")
ERRORS = __import__("pathlib").Path(__file__).parent / "data" / "errors"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["gen-data", "--samples", "60", "--seed", "1", "--out", str(d / "power.csv")]) == 0
    assert main(["gen-data", "--samples", "60", "--seed", "1", "--target", "cycles",
                 "--out", str(d / "cycles.csv")]) == 0
    for target in ("power", "cycles"):
        assert main(["train", "--data", str(d / f"{target}.csv"), "--model", "forest",
                     "--trees", "5", "--seed", "3", "--out", str(d / f"{target}.json")]) == 0
    return d


def test_no_args_is_usage_error(capsys):
    code, _, err = run(capsys)
    assert code == 1 and "usage" in err


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and __version__ in out


def test_unknown_subcommand_suggests(capsys):
    code, _, err = run(capsys, "analyse", "x.ptx")
    assert code == 1 and err.startswith("usage_error:") and "analyze" in err


def test_bad_option_is_usage_error(capsys):
    code, _, err = run(capsys, "train", "--data")
    assert code == 1 and "usage_error:" in err


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "parse", str(tmp_path / "nope.ptx"))
    assert code == 2 and err.startswith("io_error:")


def test_input_errors_exit_2(capsys):
    code, _, err = run(capsys, "analyze", str(ERRORS / "data_dependent_bound.ptx"))
    assert code == 2 and err.startswith("trip_count_unresolved:")
    code, _, err = run(capsys, "cfg", str(ERRORS / "irreducible.ptx"))
    assert code == 2 and err.startswith("irreducible_cfg:")
    code, _, err = run(capsys, "parse", str(ERRORS / "unknown_opcode.ptx"))
    assert code == 2 and err.startswith("unknown_opcode:")
    assert run(capsys, "parse", "--lenient", str(ERRORS / "unknown_opcode.ptx"))[0] == 0


def test_parse_and_cfg(capsys, tmp_path):
    code, out, _ = run(capsys, "parse", KERNEL)
    assert code == 0 and json.loads(out)
    code, out, _ = run(capsys, "parse", "--format", "ptx", KERNEL)
    assert code == 0 and ".entry" in out
    dot = tmp_path / "g.dot"
    assert run(capsys, "cfg", "--verify", KERNEL, "--dot", str(dot))[0] == 0
    assert dot.read_text().startswith("digraph")
    assert (tmp_path / "g.dot.manifest.json").exists()


def test_analyze_matches_oracle(capsys):
    a = run(capsys, "analyze", KERNEL)
    b = run(capsys, "analyze", KERNEL, "--oracle")
    assert a[0] == b[0] == 0 and json.loads(a[1]) == json.loads(b[1])
    code, out, _ = run(capsys, "analyze", KERNEL, "--csv")
    assert code == 0 and len(out.splitlines()) == 2


def test_manifest_fields(capsys, tmp_path):
    out = tmp_path / "f.csv"
    assert run(capsys, "features", "--net", NET, "--gpu", "V100S", "--clock", "1000",
               "--out", str(out))[0] == 0
    manifest = json.loads((tmp_path / "f.csv.manifest.json").read_text())
    assert set(manifest) == {"toolVersion", "schemaVersion", "subcommand", "options", "inputs",
                             "timestamp"}
    assert manifest["subcommand"] == "features"
    assert len(next(iter(manifest["inputs"].values()))) == 64


def test_clock_out_of_range(capsys):
    code, _, err = run(capsys, "features", "--net", NET, "--gpu", "V100S", "--clock", "2000")
    assert code == 2 and err.startswith("clock_out_of_range:")
    assert run(capsys, "features", "--net", NET, "--gpu", "V100S", "--clock", "2000",
               "--allow-any-clock")[0] == 0


def test_train_byte_identical(capsys, workdir, tmp_path):
    for name in ("a.json", "b.json"):
        assert run(capsys, "train", "--data", str(workdir / "power.csv"), "--model", "forest",
                   "--trees", "5", "--seed", "3", "--out", str(tmp_path / name))[0] == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (workdir / "power.json").read_bytes()


def test_env_seed(capsys, workdir, tmp_path, monkeypatch):
    monkeypatch.setenv("GPE_SEED", "3")
    assert run(capsys, "train", "--data", str(workdir / "power.csv"), "--model", "forest",
               "--trees", "5", "--out", str(tmp_path / "env.json"))[0] == 0
    assert (tmp_path / "env.json").read_bytes() == (workdir / "power.json").read_bytes()
    monkeypatch.setenv("GPE_SEED", "x")
    code, _, err = run(capsys, "gen-data", "--samples", "5")
    assert code == 2


def test_predict_evaluate_sweep_rank(capsys, workdir, tmp_path):
    feats = tmp_path / "f.csv"
    assert run(capsys, "features", "--net", NET, "--gpu", "T4", "--clock", "1000",
               "--out", str(feats))[0] == 0
    code, out, _ = run(capsys, "predict", "--model", str(workdir / "power.json"),
                       "--features", str(feats))
    assert code == 0 and out.strip()
    code, out, _ = run(capsys, "evaluate", "--data", str(workdir / "power.csv"),
                       "--model-spec", "mean", "--model-spec", "knn:k=3", "--folds", "3")
    assert code == 0 and "knn" in out
    code, out, _ = run(capsys, "sweep", "--net", NET, "--gpu", "V100S", "--clocks",
                       "397:1590:400", "--power-model", str(workdir / "power.json"),
                       "--cycle-model", str(workdir / "cycles.json"))
    assert code == 0 and out.splitlines()[0] == "clock_mhz,power_w,cycles"
    assert len(out.splitlines()) == 5
    cands = tmp_path / "c.csv"
    cands.write_text("gpu,clock_mhz\nT4,1000\nV100S,1200\nJetsonNano,900\n")
    code, out, _ = run(capsys, "rank", "--net", NET, "--candidates", str(cands),
                       "--max-power", "1e9", "--power-model", str(workdir / "power.json"),
                       "--cycle-model", str(workdir / "cycles.json"))
    assert code == 0 and len(out.strip().splitlines()) == 4


def test_sweep_schema_mismatch(capsys, workdir, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,power_w\n1,2,3\n2,3,4\n3,4,5\n")
    assert run(capsys, "train", "--data", str(bad), "--model", "tree",
               "--out", str(tmp_path / "m.json"))[0] == 0
    code, _, err = run(capsys, "sweep", "--net", NET, "--gpu", "V100S", "--clocks", "500",
                       "--power-model", str(tmp_path / "m.json"),
                       "--cycle-model", str(workdir / "cycles.json"))
    assert code == 2 and err.startswith("schema_mismatch:")


def test_gen_corpus_single(capsys, tmp_path):
    out = tmp_path / "gen"
    assert run(capsys, "gen-corpus", "--seed", "5", "--count", "1", "--out-dir", str(out))[0] == 0
    assert sorted(p.suffix for p in out.iterdir()) == [".json", ".ptx"]
    assert (tmp_path / "gen.manifest.json").exists()
    code, out_text, _ = run(capsys, "analyze", str(next(out.glob("*.ptx"))))
    assert code == 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gpe.cli", "--version"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
