import csv
import io
import json
import subprocess
import sys

import pytest

from conftest import C3_TEXT
from icbench import parse_env, random_env, serialize_env
from icbench.cli import main


@pytest.fixture
def c3_file(tmp_path):
    path = tmp_path / "c3.env"
    path.write_text(C3_TEXT)
    return str(path)


def _json(capsys):
    return json.loads(capsys.readouterr().out.splitlines()[0])


def test_ic_action(c3_file, capsys):
    assert main(["ic", "--env", c3_file, "--from", "0", "--to", "2", "--bias", "action"]) == 0
    rec = _json(capsys)
    assert rec["cost"] == 2 and rec["exactness"] == "Exact" and rec["witness"] == [0, 0]


def test_ic_program_length_identity(c3_file, capsys):
    assert main(["ic", "--env", c3_file, "--from", "0", "--to", "0", "--bias", "pl", "--regime", "bare"]) == 0
    rec = _json(capsys)
    assert rec["cost"] == 2 and rec["witness"] == "0b00"


def test_ic_combined(c3_file, capsys):
    assert main(["ic", "--env", c3_file, "--from", "0", "--to", "1", "--bias", "comb",
                 "--alpha", "1", "--beta", "1"]) == 0
    assert _json(capsys)["cost"] == 6


def test_ic_bad_index(c3_file, capsys):
    assert main(["ic", "--env", c3_file, "--from", "0", "--to", "7"]) == 3
    assert "7" in capsys.readouterr().err


def test_ic_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.env"
    bad.write_text(C3_TEXT.replace("\nt 2 0 0", ""))
    assert main(["ic", "--env", str(bad), "--from", "0", "--to", "1"]) == 2
    assert "missing transition" in capsys.readouterr().err


def test_ic_strict_budget(tmp_path, capsys):
    path = tmp_path / "g.env"
    assert main(["gen-corridor", "1101", "--out", str(path)]) == 0
    args = ["ic", "--env", str(path), "--from", "0", "--to", "5", "--bias", "pl", "--max-bits", "8"]
    assert main(args) == 0
    assert _json(capsys)["exactness"] == "ExactUpToBudget"
    assert main(args + ["--strict"]) == 4


def test_curve_outputs_and_determinism(c3_file, tmp_path, capsys):
    prefix = tmp_path / "run"
    assert main(["curve", "--env", c3_file, "--agent", "oracle", "--out", str(prefix)]) == 0
    curve = (tmp_path / "run.curve.csv").read_bytes()
    scalar = (tmp_path / "run.scalar.jsonl").read_bytes()
    assert curve == b"k,gamma\n1,1.0\n2,1.5\n"
    rec = json.loads(scalar)
    assert rec["value"] == pytest.approx((0.5 + 0.5 * 0.25) / 0.6931471805599453, abs=1e-12)
    assert main(["curve", "--env", c3_file, "--agent", "oracle", "--out", str(prefix)]) == 0
    assert (tmp_path / "run.curve.csv").read_bytes() == curve
    assert (tmp_path / "run.scalar.jsonl").read_bytes() == scalar


def test_curve_unknown_agent(c3_file, capsys):
    assert main(["curve", "--env", c3_file, "--agent", "nobody"]) == 3
    assert "UnknownAgent" in capsys.readouterr().err


def test_curve_ensemble_parallel_matches_serial(tmp_path, capsys):
    d = tmp_path / "ens"
    d.mkdir()
    for seed in range(3):
        (d / f"r{seed}.env").write_text(serialize_env(random_env(5, 2, seed)))
    base = ["curve", "--ensemble-dir", str(d), "--agent", "tabular", "--horizon", "10"]
    assert main(base + ["--out", str(tmp_path / "a")]) == 0
    assert main(base + ["--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
    for ext in (".curve.csv", ".scalar.jsonl"):
        assert (tmp_path / f"a{ext}").read_bytes() == (tmp_path / f"b{ext}").read_bytes()
    rec = json.loads((tmp_path / "a.scalar.jsonl").read_text())
    assert len(rec["weights"]) == 3 and "proxy" in rec["note"]


@pytest.mark.parametrize("scheme", ["A", "B", "C"])
def test_regret_oracle_zero_deltas(c3_file, tmp_path, scheme):
    out = tmp_path / f"{scheme}.csv"
    assert main(["regret", "--env", c3_file, "--agent", "oracle", "--scheme", scheme,
                 "--horizon", "12", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 12 and all(r["delta"] == "0" for r in rows)


def test_regret_scheme_c_gap_column_and_rerun(tmp_path, capsys):
    env = tmp_path / "r.env"
    env.write_text(serialize_env(random_env(6, 2, 1)))
    args = ["regret", "--env", str(env), "--agent", "tabular", "--scheme", "C", "--horizon", "20", "--seed", "5"]
    assert main(args + ["--out", str(tmp_path / "1.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "2.csv")]) == 0
    first = (tmp_path / "1.csv").read_bytes()
    assert first == (tmp_path / "2.csv").read_bytes()
    assert first.splitlines()[0] == b"t,s,target,cost,ic,delta,cum,G_T"


def test_regret_ensemble(tmp_path, capsys):
    d = tmp_path / "ens"
    d.mkdir()
    for seed in range(2):
        (d / f"r{seed}.env").write_text(serialize_env(random_env(4, 2, seed)))
    assert main(["regret", "--ensemble-dir", str(d), "--agent", "oracle", "--horizon", "5"]) == 0
    rec = _json(capsys)
    assert rec["value"] == 0 and rec["name"] == "learning_efficiency_B"


def test_corridor_demo(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["corridor-demo", "--n-list", "2,4", "--seeds", "2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 6
    assert {r["x_kind"] for r in rows} == {"zeros", "random"}
    for r in rows:
        assert r["knowledge_cost"] == "inf" or float(r["knowledge_cost"]) >= 0
        assert r["exactness"] in ("Exact", "ExactUpToBudget")


def test_corridor_demo_rejects_large_n():
    assert main(["corridor-demo", "--n-list", "12"]) == 3


def test_generators_emit_parsable_files(tmp_path, capsys):
    for args in (["gen-random", "4", "2", "--seed", "3"], ["gen-cycle", "5"], ["gen-grid", "2", "3"]):
        assert main(args) == 0
        env = parse_env(capsys.readouterr().out)
        assert env.n in (4, 5, 6)
    assert main(["gen-corridor", ""]) == 3


def test_module_entry_point(c3_file):
    proc = subprocess.run([sys.executable, "-m", "icbench", "ic", "--env", c3_file, "--from", "1", "--to", "0"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["cost"] == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["ic", "--env"])
    assert info.value.code == 2
