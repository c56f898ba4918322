import csv
import json
import shutil
from importlib import resources

import pytest

from hesccd.cli import run_command
from hesccd.solver.external import highs_available

DATA = resources.files("hesccd") / "data"


def cfg(name):
    return str(DATA / name)


def test_validate_ok(capsys):
    assert run_command(["validate", "--config", cfg("case1.json")]) == 0
    assert capsys.readouterr().out.strip() == "ok"


def test_validate_reports_violation(tmp_path, capsys):
    raw = json.loads((DATA / "arbitrage.json").read_text())
    raw["generator"]["u_g_min"] = 10.0
    raw["generator"]["u_g_max"] = 5.0
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(raw))
    assert run_command(["validate", "--config", str(p)]) == 1
    assert "bound inversion on u_G" in capsys.readouterr().out


def test_run_arbitrage(tmp_path):
    assert run_command(["run", "--config", cfg("arbitrage.json"), "--tol", "1e-9", "--out", str(tmp_path)]) == 0
    npv = json.loads((tmp_path / "npv.json").read_text())
    assert npv["npv"] == 100.0
    for name in ("trajectory.csv", "accounting.csv", "report.json", "manifest.json", "timing.json"):
        assert (tmp_path / name).exists()
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["status"] == "optimal" and report["sigma"]["E"] == pytest.approx(1.0)


def test_contradictory_overlay_exit_code(tmp_path, capsys):
    code = run_command(["run", "--config", cfg("arbitrage.json"), "--overlay", "contradictory", "--out", str(tmp_path)])
    assert code == 2
    assert "eq11" in capsys.readouterr().out


def test_error_exit_codes(tmp_path, capsys):
    assert run_command(["run", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == 3
    assert run_command(["run", "--config", cfg("arbitrage.json"), "--bogus"]) == 1
    assert run_command(["frobnicate"]) == 1
    assert run_command(["run", "--config", cfg("arbitrage.json"), "--overlay", "nope", "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert all(line.startswith("error: ") for line in err)


def test_missing_signal_file_is_io_error(tmp_path, capsys):
    raw = json.loads((DATA / "case1.json").read_text())
    p = tmp_path / "c.json"
    p.write_text(json.dumps(raw))
    assert run_command(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 3


def test_rerun_outputs_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run_command(["run", "--config", cfg("case3.json"), "--out", str(out)]) == 0
    for name in ("trajectory.csv", "accounting.csv", "npv.json", "report.json", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert json.loads((a / "manifest.json").read_text())["digest"]


def test_digest_tracks_input_bytes(tmp_path):
    src = tmp_path / "src"
    shutil.copytree(DATA, src)
    run_command(["run", "--config", str(src / "arbitrage.json"), "--out", str(tmp_path / "a")])
    raw = json.loads((src / "arbitrage.json").read_text())
    raw["name"] = "arbitrage-renamed"
    (src / "arbitrage.json").write_text(json.dumps(raw))
    run_command(["run", "--config", str(src / "arbitrage.json"), "--out", str(tmp_path / "b")])
    da = json.loads((tmp_path / "a" / "manifest.json").read_text())["digest"]
    db = json.loads((tmp_path / "b" / "manifest.json").read_text())["digest"]
    assert da != db


def test_report_roundtrip(tmp_path):
    run_command(["run", "--config", cfg("case3.json"), "--out", str(tmp_path / "run")])
    code = run_command(["report", "--config", cfg("case3.json"), "--trajectory", str(tmp_path / "run" / "trajectory.csv"),
                        "--out", str(tmp_path / "rep")])
    assert code == 0
    assert (tmp_path / "run" / "accounting.csv").read_bytes() == (tmp_path / "rep" / "accounting.csv").read_bytes()
    a = json.loads((tmp_path / "run" / "npv.json").read_text())
    b = json.loads((tmp_path / "rep" / "npv.json").read_text())
    assert b["npv"] == pytest.approx(a["npv"], rel=1e-12)


def test_default_output_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("HESCCD_OUT", str(tmp_path / "env"))
    assert run_command(["run", "--config", cfg("arbitrage.json")]) == 0
    assert (tmp_path / "env" / "npv.json").exists()


def test_export_and_import(tmp_path):
    assert run_command(["export-mps", "--config", cfg("arbitrage.json"), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "model.mps").exists() and (tmp_path / "names.csv").exists()
    with open(tmp_path / "names.csv", newline="") as fh:
        assert next(csv.reader(fh)) == ["short", "kind", "long", "family"]
    sol = tmp_path / "sol.txt"
    sol.write_text("C0000001 1.0\n")
    assert run_command(["import-solution", "--config", cfg("arbitrage.json"), "--solution", str(sol),
                        "--out", str(tmp_path)]) == 2


@pytest.mark.skipif(not highs_available(), reason="highspy not installed")
def test_external_solver_route(tmp_path):
    code = run_command(["run", "--config", cfg("arbitrage.json"), "--external-solver", "highs", "--out", str(tmp_path)])
    assert code == 0
    assert json.loads((tmp_path / "npv.json").read_text())["npv"] == pytest.approx(100.0, abs=1e-9)
    assert run_command(["import-solution", "--config", cfg("arbitrage.json"), "--solution", str(tmp_path / "solution.txt"),
                        "--out", str(tmp_path / "imp")]) == 0


def test_sweep_outputs(tmp_path):
    code = run_command(["sweep", "--config", cfg("case2.json"), "--out", str(tmp_path), "--workers", "2"])
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "sweep.csv", newline="")))
    assert rows[0][:2] == ["index", "economics.c_occ_e"]
    assert len(rows) == 4
    assert all(r[2] == "optimal" for r in rows[1:])
