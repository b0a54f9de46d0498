from __future__ import annotations
import csv
import json
import math

import pytest
from typer.testing import CliRunner

from nsq_lab.cli import app

runner = CliRunner()


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# params ")
    return json.loads(lines[0][len("# params "):]), list(csv.DictReader(lines[1:]))


def test_params_command(tmp_path):
    result = runner.invoke(app, ["params", "--N", repr(2.0 * math.exp(20.4)), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    doc = json.loads((tmp_path / "params.json").read_text(encoding="utf-8"))
    assert list(doc)[0] == "params"
    assert doc["params"]["r"] == 20
    assert doc["params"]["eps"] == pytest.approx(0.852144, abs=1e-6)
    assert doc["params"]["Y"] == 0.4
    assert doc["derived"]["theorem_eps"] > 0.0


def test_params_without_clamp_fails():
    result = runner.invoke(app, ["params", "--N", repr(2.0 * math.exp(20.4)), "--no-clamp-y"])
    assert result.exit_code == 2
    assert "Y < 0.45" in result.output


def test_tau_above_ceiling_exits_two():
    result = runner.invoke(app, ["params", "--X", "1000", "--tau", "1.03"])
    assert result.exit_code == 2
    assert "tau < 35/34" in result.output


def test_sieve_command(tmp_path):
    result = runner.invoke(app, ["sieve", "--lo", "10", "--hi", "30", "--format", "json", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    doc = json.loads((tmp_path / "sieve.json").read_text(encoding="utf-8"))
    assert [row["p"] for row in doc["rows"]] == [11, 13, 17, 19, 23, 29]
    assert doc["params"] == {"lo": 10, "hi": 30}


def test_chi_dump(tmp_path):
    result = runner.invoke(app, ["chi-dump", "--X", "1000", "--Y", "0.3", "--points", "50", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    params, rows = read_csv(tmp_path / "chi.csv")
    assert params["Y"] == 0.3
    assert len(rows) == 50
    assert float(rows[0]["chi"]) == 1.0
    assert max(float(r["gap"]) for r in rows) < 1e-8


def test_expsum_command(tmp_path):
    result = runner.invoke(app, [
        "expsum", "--X", "500", "--Y", "0.3", "--kind", "V", "--alpha-min", "-1", "--alpha-max", "1",
        "--points", "11", "--threads", "2", "--out", str(tmp_path),
    ])
    assert result.exit_code == 0, result.output
    _, rows = read_csv(tmp_path / "expsum_V.csv")
    assert [float(r["alpha"]) for r in rows][::5] == [-1.0, 0.0, 1.0]


def test_vaughan_check_command(tmp_path):
    result = runner.invoke(app, [
        "vaughan-check", "--X", "5000", "--alpha", "0.3", "--m", "2", "--out", str(tmp_path),
    ])
    assert result.exit_code == 0, result.output
    doc = json.loads((tmp_path / "vaughan.json").read_text(encoding="utf-8"))
    assert doc["discrepancy"] < 1e-6
    assert doc["reconstruction_gap"] < 1e-9


def test_bounds_shift_inequality():
    result = runner.invoke(app, ["bounds", "--lemma", "weyl"])
    assert result.exit_code == 0, result.output


def test_bounds_over_grid(tmp_path):
    result = runner.invoke(app, [
        "bounds", "--lemma", "l2s", "--Y", "0.3", "--x-grid", "200", "--x-grid", "300", "--out", str(tmp_path),
    ])
    assert result.exit_code == 0, result.output
    _, rows = read_csv(tmp_path / "bounds_l2s.csv")
    assert len(rows) == 2
    assert {r["rule"] for r in rows} == {"l2-S"}


def test_solve_witness(tmp_path):
    result = runner.invoke(app, [
        "solve", "--N", repr(3.0 * 101 ** 1.02), "--Y", "0.06", "--with-integrals", "--out", str(tmp_path),
    ])
    assert result.exit_code == 0, result.output
    _, rows = read_csv(tmp_path / "triples.csv")
    assert [(r["p1"], r["p2"], r["p3"]) for r in rows] == [("101", "101", "101")]
    summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))
    assert summary["ordered_triples"] == 1
    assert summary["verified_triples"] == 1
    assert summary["I1"]["terms"] == 1


def test_solve_over_budget_exits_three():
    result = runner.invoke(app, ["solve", "--X", "1e12"])
    assert result.exit_code == 3


def test_solve_failed_reverification_exits_four(monkeypatch):
    monkeypatch.setattr("nsq_lab.solver.inside_exact", lambda *args, **kwargs: False)
    result = runner.invoke(app, ["solve", "--N", repr(3.0 * 101 ** 1.02), "--Y", "0.06"])
    assert result.exit_code == 4


def test_scaling_command(tmp_path):
    result = runner.invoke(app, [
        "scaling", "--Y", "0.3", "--x-grid", "200", "--x-grid", "300", "--x-grid", "400", "--x-grid", "600",
        "--out", str(tmp_path),
    ])
    assert result.exit_code == 0, result.output
    _, rows = read_csv(tmp_path / "scaling.csv")
    assert len(rows) == 4
    fit = json.loads((tmp_path / "scaling_fit.json").read_text(encoding="utf-8"))
    assert fit["predictor_slope"] == pytest.approx(3.0 - 1.028, abs=1e-9)


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"X": 1000, "Y": 0.2, "tau": 1.025}), encoding="utf-8")
    result = runner.invoke(app, ["params", "--config", str(cfg), "--Y", "0.25", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    doc = json.loads((tmp_path / "params.json").read_text(encoding="utf-8"))
    assert doc["params"]["Y"] == 0.25
    assert doc["params"]["tau"] == 1.025


def test_unknown_config_key_exits_two(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"X": 1000, "colour": "blue"}), encoding="utf-8")
    result = runner.invoke(app, ["params", "--config", str(cfg)])
    assert result.exit_code == 2
    assert "colour" in result.output
