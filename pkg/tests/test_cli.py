import json
import subprocess
import sys

import pytest

from ising_screen.cli import main
from ising_screen.model import ConnectivityMatrix, SampleSet


@pytest.fixture
def lattice(tmp_path):
    path = tmp_path / "w.json"
    assert main(["generate", "--topology", "lattice", "--side", "3", "--out", str(path)]) == 0
    return path


def test_generate_random_regular(tmp_path):
    out = tmp_path / "rr.json"
    assert main(["generate", "--topology", "random-regular", "--p", "10", "--degree", "3",
                 "--seed", "4", "--out", str(out)]) == 0
    W = ConnectivityMatrix.load(out)
    assert W.p == 10 and set(W.degrees()) == {3}


def test_generate_missing_option_is_usage_error(tmp_path):
    assert main(["generate", "--topology", "lattice", "--out", str(tmp_path / "x")]) == 1
    assert main(["generate", "--topology", "random-regular", "--out", str(tmp_path / "x")]) == 1


def test_generate_infeasible_is_runtime_error(tmp_path):
    assert main(["generate", "--topology", "random-regular", "--p", "5", "--degree", "3",
                 "--out", str(tmp_path / "x")]) == 2


def test_unknown_subcommand_and_bad_flag():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["sample", "--n", "abc"])
    assert exc.value.code == 1


@pytest.mark.parametrize("method", ["exact", "gibbs"])
def test_sample_header_flag(tmp_path, lattice, method):
    plain, headed = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["sample", "--model", str(lattice), "--n", "50", "--method", method,
            "--sweeps", "20", "--seed", "1"]
    assert main(base + ["--out", str(plain)]) == 0
    assert main(base + ["--header", "--out", str(headed)]) == 0
    assert headed.read_text().splitlines()[0] == ",".join(f"z{i}" for i in range(9))
    assert headed.read_text().splitlines()[1:] == plain.read_text().splitlines()
    assert SampleSet.load_csv(headed).n == 50


def test_sample_missing_model_is_runtime_error(tmp_path):
    assert main(["sample", "--model", str(tmp_path / "nope.json"), "--n", "5",
                 "--out", str(tmp_path / "s.csv")]) == 2


def test_fit_round_trip(tmp_path, lattice):
    train, val = tmp_path / "t.csv", tmp_path / "v.csv"
    main(["sample", "--model", str(lattice), "--n", "2000", "--seed", "1", "--out", str(train)])
    main(["sample", "--model", str(lattice), "--n", "2000", "--seed", "2", "--out", str(val)])
    out = tmp_path / "est.json"
    assert main(["fit", "--data", str(train), "--validation", str(val), "--method", "l1-lr",
                 "--eta", "0.5", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["method"] == "l1-lr"
    assert main(["fit", "--data", str(train), "--method", "l0l2-ise", "--out", str(out)]) == 0
    assert main(["fit", "--data", str(train), "--method", "l1-lr", "--out", str(out)]) == 1


def test_fit_bad_data_is_runtime_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,0\n")
    assert main(["fit", "--data", str(bad), "--method", "l0l2-lr", "--out", str(tmp_path / "e")]) == 2


def test_experiment_and_report(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p_list": [9], "n_list": [300], "repetitions": 2,
                               "methods": ["l0l2-lr"]}))
    out = tmp_path / "run"
    assert main(["experiment", "--config", str(cfg), "--out-dir", str(out)]) == 0
    for name in ("records.csv", "timings.csv", "complexity.csv", "phase_transition_p9.svg",
                 "phase_transition_l0l2-lr_9.csv"):
        assert (out / name).exists(), name
    again = tmp_path / "again"
    assert main(["report", "--records", str(out / "records.csv"), "--out-dir", str(again),
                 "--no-plots"]) == 0
    assert (again / "records.csv").read_text() == (out / "records.csv").read_text()
    assert not list(again.glob("*.svg"))


def test_experiment_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus_key": 1}))
    assert main(["experiment", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 1


def test_console_entry_point(tmp_path):
    out = tmp_path / "w.json"
    res = subprocess.run([sys.executable, "-m", "ising_screen", "generate", "--topology",
                          "lattice", "--side", "2", "--out", str(out)], capture_output=True)
    assert res.returncode == 0 and out.exists()
