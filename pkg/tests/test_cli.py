import json
import subprocess
import sys

import numpy as np
import pytest

from ewreduce import catalog
from ewreduce.cli import run
from ewreduce.symmetries import expected_table


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_passes_on_known_solution(capsys):
    code, out, _ = invoke(capsys, "verify", "rozw2", "--alpha", "-0.5", "--b", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["command"] == "verify" and rep["params"] == {"alpha": -0.5, "b": 1.0, "seed": 0}
    assert rep["checks"] and all(c["pass"] for c in rep["checks"])
    assert set(rep["checks"][0]) == {"name", "value", "tol", "pass"}


@pytest.mark.parametrize("argv", [["verify", "nosuch"], ["bogus"], [], ["solve", "--grid", "8,9,9"],
                                  ["solve", "--grid", "abc"], ["recursion", "flat_reduced", "--depth", "4"],
                                  ["recursion", "rozw2"]])
def test_usage_and_domain_errors_exit_2(capsys, argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 2
    assert out == ""


def test_failed_check_exits_1(capsys):
    code, out, _ = invoke(capsys, "verify", "rozw1", "--tol", "0")
    assert code == 1
    assert not all(c["pass"] for c in json.loads(out)["checks"])


def test_env_tolerance(capsys, monkeypatch):
    monkeypatch.setenv("EWREDUCE_TOL", "1e-300")
    code, out, _ = invoke(capsys, "lax", "rozw2", "--samples", "3")
    assert code == 1 and json.loads(out)["checks"][0]["tol"] == 1e-300
    # explicit flag wins over the environment
    code, _, _ = invoke(capsys, "lax", "rozw2", "--samples", "3", "--tol", "1e-8")
    assert code == 0
    monkeypatch.setenv("EWREDUCE_TOL", "nope")
    assert invoke(capsys, "lax", "rozw2")[0] == 2


def test_symmetries_table(capsys, tmp_path):
    csv_path = tmp_path / "t.csv"
    code, out, _ = invoke(capsys, "symmetries", "--alpha", "-0.4", "--table", "--csv", str(csv_path))
    assert code == 0
    rep = json.loads(out)
    T = np.array(rep["table"])
    assert T.shape == (7, 7, 7)
    assert np.max(np.abs(T - expected_table(-0.4))) < 1e-10
    assert csv_path.read_text().startswith("i,j,X1")


def test_output_is_deterministic_and_written_to_file(capsys, tmp_path):
    outs = [invoke(capsys, "verify", "rozw1", "--seed", "3")[1] for _ in range(2)]
    assert outs[0] == outs[1]
    path = tmp_path / "r.json"
    code, out, _ = invoke(capsys, "verify", "rozw1", "--seed", "3", "--out", str(path))
    assert code == 0 and path.read_text() == out


def test_timestamp_is_opt_in(capsys):
    _, out, _ = invoke(capsys, "verify", "rozw1")
    assert "timestamp" not in json.loads(out)
    _, out, _ = invoke(capsys, "verify", "rozw1", "--timestamp")
    assert "timestamp" in json.loads(out)


def test_catalog_list(capsys):
    code, out, _ = invoke(capsys, "catalog", "list")
    assert code == 0
    assert [s["name"] for s in json.loads(out)["solutions"]] == list(catalog.NAMES)


@pytest.mark.parametrize("name", ["rozw2", "berger"])
def test_reduce(capsys, name):
    code, out, _ = invoke(capsys, "reduce", name, "--points", "4")
    assert code == 0
    assert json.loads(out)["checks"][0]["name"] == "chi"


def test_recursion_levels(capsys):
    code, out, _ = invoke(capsys, "recursion", "flat_reduced", "--depth", "2", "--points", "4")
    assert code == 0
    assert [lv["label"] for lv in json.loads(out)["levels"]] == ["T0", "T1", "T2"]


def test_solve_writes_csv_and_history(capsys, tmp_path):
    csv_path, hist = tmp_path / "g.csv", tmp_path / "h.json"
    code, out, _ = invoke(capsys, "solve", "--grid", "9,9,9", "--csv", str(csv_path), "--history", str(hist))
    assert code == 0
    assert json.loads(out)["iterations"] <= 8
    assert csv_path.read_text().splitlines()[0] == "x,y,v,G"
    assert json.loads(hist.read_text())["converged"] is True


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "ewreduce", "verify", "flat4", "--points", "3"],
                       capture_output=True, text=True)
    assert p.returncode == 0, p.stderr
    assert json.loads(p.stdout)["command"] == "verify"
