import json
import os
import subprocess
import sys

import numpy as np
import pytest

from qcramer import cli
from qcramer.density import GridDensity, read_grid
from qcramer.report import InequalityReport


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_beta_fn_spot(capsys):
    code, out, _ = run(["verify", "beta-fn", "--a", "2", "--b", "2", "--seed", "1"], capsys)
    doc = json.loads(out)
    r = doc["reports"][0]
    assert code == 0
    assert r["lhs"] == pytest.approx(1.0, rel=1e-14) and r["rhs"] == pytest.approx(1 / 6, rel=1e-14)
    assert doc["config"]["params"] == {"a": 2.0, "b": 2.0} and doc["config"]["seed"] == 1


def test_heisenberg_and_q_location(capsys):
    code, out, _ = run(["verify", "heisenberg", "--psi", "gauss:sigma=2", "--seed", "0"], capsys)
    assert code == 0 and json.loads(out)["reports"][0]["saturated"]
    code, out, _ = run(["verify", "q-location-cr", "--q", "0.9", "--alpha", "3", "--dim", "2", "--seed", "0"], capsys)
    assert code == 0 and abs(json.loads(out)["reports"][0]["ratio"] - 1) < 1e-4


def test_uncertainty_euclidean_weak_not_counted(capsys):
    code, out, _ = run(["verify", "uncertainty-euclidean", "--psi", "qgauss:q=0.8", "--q", "0.8", "--seed", "0"],
                       capsys)
    reps = {r["name"]: r for r in json.loads(out)["reports"]}
    assert reps["uncertainty-euclidean-weak"]["ratio"] < 1
    assert reps["uncertainty-euclidean-weak"]["params"]["premise_holds"] is False
    assert code == 0


def test_csv_output(capsys, tmp_path):
    out_path = tmp_path / "r.csv"
    code, _, _ = run(["verify", "stam", "--q", "1.2", "--format", "csv", "--out", str(out_path), "--seed", "3"],
                     capsys)
    lines = out_path.read_text().splitlines()
    assert code == 0
    assert lines[0].startswith("# config: ")
    assert lines[1].split(",")[:7] == ["name", "lhs", "rhs", "ratio", "slack", "saturated", "numeric_error"]


def test_config_replay_is_identical(capsys, tmp_path):
    code, first, _ = run(["verify", "holder", "--alpha", "1.5", "--dim", "2", "--norm", "lp:3", "--seed", "42"],
                         capsys)
    p = tmp_path / "prev.json"
    p.write_text(first)
    code2, second, _ = run(["verify", "holder", "--config", str(p)], capsys)
    assert code == code2 == 0 and first == second


def test_random_seed_recorded(capsys):
    _, out, _ = run(["verify", "beta-fn"], capsys)
    assert isinstance(json.loads(out)["config"]["seed"], int)


@pytest.mark.parametrize("argv,msg", [
    (["verify", "beta-fn", "--q", "0.9"], "--q not used by beta-fn"),
    (["verify", "lutwak", "--density", "nope:1"], "unknown density kind"),
    (["verify", "lutwak", "--q", "0.2"], "diverges unless"),
    (["verify", "location-cr", "--weight-density", "uniform:a=-1,b=1"], "SupportError"),
    (["verify", "uncertainty-general", "--alpha", "1"], "alpha must lie"),
    (["verify", "uncertainty-euclidean", "--psi", "gauss:sigma=1,extent=2"], "AliasingError"),
    (["frobnicate"], "invalid choice"),
    ([], "missing command"),
])
def test_usage_errors(argv, msg, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1
    assert msg in err


def test_bad_config(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"command": "verify", "check": "beta-fn", "wat": 1}))
    code, _, err = run(["verify", "beta-fn", "--config", str(p)], capsys)
    assert code == 1 and "unknown config keys" in err


def test_violation_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli, "_run_check", lambda *a: [InequalityReport("fake", 0.5, 1.0)])
    code, _, _ = run(["verify", "beta-fn", "--seed", "0"], capsys)
    assert code == cli.EXIT_VIOLATION == 2


def test_simulate_scenario_file(capsys, tmp_path):
    p = tmp_path / "s.txt"
    p.write_text("family = gauss-location:sigma=1\nestimator = shrink:0.9\ntheta = 1.0\nbudget = 20000\nseed = 7\n")
    code, out, _ = run(["simulate", str(p)], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["config"]["seed"] == 7
    assert doc["reports"][0]["rhs"] == pytest.approx(0.9, abs=1e-9)
    code, out2, _ = run(["simulate", str(p)], capsys)
    assert out == out2


def test_minimize_writes_density(capsys, tmp_path):
    g = tmp_path / "g.grid"
    code, out, _ = run(["minimize", "--q", "1", "--restarts", "2", "--density-out", str(g), "--seed", "0"], capsys)
    assert code == 0
    rep = json.loads(out)["reports"][0]
    assert abs(rep["ratio"] - 1) < 1e-6 and rep["params"]["l1_distance"] < 1e-3
    axes, vals = read_grid(g)
    assert GridDensity(axes, vals, check=False).mass() == pytest.approx(1.0, abs=1e-6)


GRID = """check = q-location-cr
dim = 1
grid.q = 0.3, 0.9, 1.2
grid.alpha = 2, 3
"""


def test_scan(capsys, tmp_path):
    p = tmp_path / "grid.txt"
    p.write_text(GRID)
    code, out, _ = run(["scan", str(p), "--seed", "0"], capsys)
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 6
    assert [r["grid.q"] for r in rows] == [0.3, 0.3, 0.9, 0.9, 1.2, 1.2]
    assert rows[0]["inadmissible"] and not rows[0]["violation"]
    assert all(abs(r["ratio"] - 1) < 1e-4 for r in rows[2:])
    p.write_text("check = beta-fn\ngrid.q = 1, 2\n")
    code, _, err = run(["scan", str(p)], capsys)
    assert code == 1 and "not used by beta-fn" in err


def test_scan_threads_byte_identical(tmp_path):
    p = tmp_path / "grid.txt"
    p.write_text("check = simulate\nbudget = 20000\ngrid.estimator = identity; shrink:0.9\ngrid.theta = 0; 1\n")
    outs = []
    for t in ("1", "4", "8"):
        env = dict(os.environ, QCRAMER_THREADS=t)
        r = subprocess.run([sys.executable, "-m", "qcramer.cli", "scan", str(p), "--seed", "5", "--format", "csv"],
                           capture_output=True, env=env, check=True)
        outs.append(r.stdout)
    assert outs[0] == outs[1] == outs[2] and len(outs[0]) > 0
