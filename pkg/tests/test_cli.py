import csv
import io
import json
import subprocess
import sys

import pytest

from jamlim import __version__
from jamlim.cli import parse_window, run
from jamlim.scheme import nn_exclusion, save_scheme


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def test_bounds_1d_json():
    code, text = call("bounds-1d", "--order", "2")
    assert code == 0
    doc = json.loads(text)
    assert doc["N"] == 2 and round(doc["upper"], 4) == 0.4339
    assert set(doc) >= {"lower", "upper", "total_mass", "N", "manifest"}
    assert doc["manifest"]["command"] == "bounds-1d" and doc["manifest"]["version"] == __version__


def test_bounds_1d_human_line(capsys):
    run(["bounds-1d", "--order", "2"], io.StringIO())
    assert "0.4339" in capsys.readouterr().err


def test_tail_bound():
    code, text = call("tail-bound", "--d", "1", "--nu", "1", "--n", "0")
    assert code == 0 and json.loads(text)["bound"] == 1.0
    code, text = call("tail-bound", "--n", "1,2,3", "--csv")
    rows = list(csv.DictReader(line for line in text.splitlines() if not line.startswith("#")))
    assert [float(r["bound"]) for r in rows] == [1.5, 1.5, 27 / 24]


def test_sample_window_is_byte_identical():
    argv = [sys.executable, "-m", "jamlim", "sample-window", "--d", "1", "--nu", "1", "--scheme", "nn-l1",
            "--seed", "7", "--window", "-3..3"]
    a = subprocess.run(argv, capture_output=True, check=True)
    b = subprocess.run(argv, capture_output=True, check=True)
    assert a.stdout == b.stdout and b"\r" not in a.stdout
    doc = json.loads(a.stdout)
    assert doc["seed"] == "7" and doc["manifest"]["seed0"] == 7
    assert len(doc["configuration"]["spins"]) == 7
    assert doc["manifest"]["scheme_hash"] == nn_exclusion(1, 1).digest()


def test_seed_recorded_verbatim():
    code, text = call("park", "--window", "0..4", "--seed", "0x1F")
    doc = json.loads(text)
    assert doc["seed"] == "0x1F" and doc["manifest"]["seed0"] == 31
    code2, text2 = call("park", "--window", "0..4", "--seed", "31")
    assert json.loads(text2)["configuration"]["spins"] == doc["configuration"]["spins"]


def test_park_with_boundary_file(tmp_path):
    bc = tmp_path / "bc.json"
    bc.write_text(json.dumps({"d": 1, "sites": [[-1], [1]], "spins": [1, 1]}))
    code, text = call("park", "--window", "0..0", "--bc", f"file:{bc}")
    doc = json.loads(text)
    assert code == 0 and doc["configuration"]["spins"] == [0]
    assert doc["configuration"]["boundary"]["collar"]["spins"] == [1, 1]


def test_scheme_file(tmp_path):
    path = tmp_path / "s.json"
    save_scheme(nn_exclusion(2, 1, "linf"), path)
    code, text = call("sample-window", "--scheme", f"file:{path}", "--window", "-1..1,0..0")
    assert code == 0 and json.loads(text)["manifest"]["scheme_hash"] == nn_exclusion(2, 1, "linf").digest()


def test_armour_stats():
    code, text = call("armour-stats", "--replicas", "5", "--seed", "3")
    rows = json.loads(text)["replicas"]
    assert [r["seed"] for r in rows] == [3, 4, 5, 6, 7]
    assert all(r["armour_size"] >= 1 and r["explored"] >= 2 for r in rows)


def test_density_csv_columns():
    code, text = call("density", "--method", "box", "--n", "10,20", "--replicas", "50", "--csv")
    lines = text.splitlines()
    assert lines[0].startswith("# manifest ")
    assert lines[1] == "n_or_x,mean,std_error,ci_low,ci_high,bound,replicas,seed0"
    rows = list(csv.DictReader(lines[1:]))
    assert [r["n_or_x"] for r in rows] == ["10", "20"] and rows[0]["bound"] == ""


def test_density_methods():
    for method in ("perfect", "ergodic"):
        code, text = call("density", "--method", method, "--n", "100", "--replicas", "200")
        assert code == 0
        assert 0.3 < json.loads(text)["rows"][0]["mean"] < 0.6


def test_jobs_do_not_change_output():
    a = call("correlation", "--x", "4", "--replicas", "3000")[1]
    b = call("correlation", "--x", "4", "--replicas", "3000", "--jobs", "2")[1]
    strip = lambda t: {k: v for k, v in json.loads(t).items() if k != "manifest"}
    assert strip(a) == strip(b)


def test_correlation_degenerate_exit_code():
    code, text = call("correlation", "--scheme", "full", "--x", "3", "--replicas", "50")
    assert code == 4
    assert json.loads(text)["reports"][0]["degenerate"] is True


def test_discrepancy():
    code, text = call("discrepancy", "--n", "3,6", "--replicas", "500", "--event", "pattern:1")
    assert code == 0 and len(json.loads(text)["rows"]) == 2
    assert call("discrepancy", "--event", "pattern:12")[0] == 2


def test_budget_exceeded_exit_code():
    code, _ = call("sample-window", "--d", "2", "--window", "-5..5,-5..5", "--budget", "121")
    assert code == 3


def test_budget_env(monkeypatch):
    monkeypatch.setenv("JAMLIM_BUDGET", "121")
    assert call("sample-window", "--d", "2", "--window", "-5..5,-5..5")[0] == 3


@pytest.mark.parametrize("argv", [
    ["park"],
    ["nonsense"],
    ["park", "--window", "0..3", "--bogus"],
    ["park", "--d", "2", "--window", "0..3"],
    ["park", "--window", "3..0"],
    ["park", "--window", "a..b"],
    ["park", "--window", "0..2", "--seed", "xyz"],
    ["park", "--window", "0..2", "--scheme", "file:/nonexistent.json"],
    ["park", "--window", "0..2", "--bc", "periodic"],
    ["density", "--replicas", "1"],
    ["tail-bound", "--n", "-1"],
])
def test_usage_errors(argv, capsys):
    assert call(*argv)[0] == 2
    err = capsys.readouterr().err.strip()
    assert err.startswith("jamlim:") and "\n" not in err


def test_malformed_scheme_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{\"d\": 1, \"nu\": 1, \"kind\": \"table\", \"table\": [\"1\"]}")
    assert call("park", "--window", "0..2", "--scheme", f"file:{path}")[0] == 2
    path.write_text("not json")
    assert call("park", "--window", "0..2", "--scheme", f"file:{path}")[0] == 2
    bc = tmp_path / "bc.json"
    bc.write_text(json.dumps({"d": 2, "sites": [[0, 1]], "spins": [1]}))
    assert call("park", "--window", "0..2", "--bc", f"file:{bc}")[0] == 2


def test_parse_window():
    assert parse_window("-1..1", 1).ravel().tolist() == [-1, 0, 1]
    assert parse_window("0..1,5", 2).tolist() == [[0, 5], [1, 5]]


def test_console_script():
    out = subprocess.run(["jamlim", "tail-bound", "--n", "3"], capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["bound"] == 27 / 24
