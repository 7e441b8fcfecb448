"""Command-line behaviour: exit codes, reports, exports and determinism."""

import json
import subprocess
import sys

import pytest

from spintempo import docio
from spintempo.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, export_operator, main
from spintempo.dynamics.scenarios import data_path
from spintempo.opcore import parse_operator, to_dsl

SMALL = """\
kind: run
field: zero.yaml
grid: {axes: [1], lo: [-40], hi: [40], n: [128]}
packet: {center: [0], width: [4], k: [0.1]}
integrator: {scheme: cn, dt: 0.1, steps: 20, record_every: 5}
"""


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(out: str) -> dict:
    rep = json.loads(out)
    docio.validate(rep, "report")
    return rep


def test_verify_passes(capsys):
    code, out, err = run(capsys, "verify")
    assert code == EXIT_PASS
    rep = report(out)
    assert rep["status"] == "pass"
    names = {r["name"] for r in rep["results"]}
    assert {"H_FW", "central", "p1p2", "dsl_round_trip"} <= names
    assert "verify: pass" in err


def test_verify_without_rewrites_fails(capsys):
    code, out, err = run(capsys, "verify", "--no-rewrites", "--skip-properties")
    assert code == EXIT_FAIL
    rep = report(out)
    failed = [r for r in rep["results"] if not r["passed"]]
    assert any(r["name"] == "central" for r in failed)
    assert all(r["difference"] for r in failed)
    assert rep["config"]["rules"] == []


def test_verify_fixture_group(capsys):
    code, out, _ = run(capsys, "verify", "--fixture", "tempo", "--fixture", "p1p2", "--skip-properties")
    assert code == EXIT_PASS
    assert [r["name"] for r in report(out)["results"]] == ["p1p2", "tempo"]


def test_verify_flat(capsys):
    code, out, _ = run(capsys, "verify", "--flat", "--skip-properties")
    assert code == EXIT_PASS and report(out)["config"]["flat"] is True


def test_verify_min_mpow_guard(capsys):
    code, _, err = run(capsys, "verify", "--min-mpow", "0")
    assert code == EXIT_USAGE and "min-mpow" in err


@pytest.mark.parametrize("name, code", [("point_mass.yaml", EXIT_PASS), ("dipole.yaml", EXIT_PASS), ("broken.yaml", EXIT_FAIL)])
def test_fields_exit_codes(capsys, name, code):
    got, out, _ = run(capsys, "fields", str(data_path(name)))
    assert got == code
    rep = report(out)
    assert [r["name"] for r in rep["results"]] == ["field-equations", "gauge"]
    assert rep["status"] == ("pass" if code == EXIT_PASS else "fail")


def test_fields_tolerance_provenance(capsys):
    _, out, _ = run(capsys, "fields", str(data_path("point_mass.yaml")))
    assert all(r["tolerance_source"].endswith("checks.tolerance") for r in report(out)["results"])
    _, out, _ = run(capsys, "fields", str(data_path("point_mass.yaml")), "--tolerance", "1e-9")
    assert all(r["tolerance_source"] == "command line --tolerance" for r in report(out)["results"])


def test_fields_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "fields", str(tmp_path / "none.yaml"))
    assert code == EXIT_USAGE and "cannot read" in err


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE
    assert run(capsys)[0] == EXIT_USAGE
    assert run(capsys, "export", "H_nope")[0] == EXIT_USAGE
    assert run(capsys, "--threads", "0", "export", "H")[0] == EXIT_USAGE
    assert run(capsys, "--help")[0] == 0


def test_bad_scenario_reports_line(capsys, tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(SMALL.replace("dt: 0.1", "dt: fast"))
    code, _, err = run(capsys, "simulate", str(path))
    assert code == EXIT_USAGE
    assert f"{path}:5:" in err


def test_bad_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("threads: 1\nverify:\n  seeds: 3\n")
    code, _, err = run(capsys, "--config", str(cfg), "verify")
    assert code == EXIT_USAGE and f"{cfg}:3" in err


def test_packet_outside_grid_is_usage_error(capsys, tmp_path):
    path = tmp_path / "wide.yaml"
    path.write_text(SMALL.replace("width: [4]", "width: [40]"))
    code, _, err = run(capsys, "simulate", str(path))
    assert code == EXIT_USAGE
    assert "WavepacketError" in err and f"{path}:4" in err


def test_simulate_writes_report_and_csv(capsys, tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(SMALL)
    out_dir = tmp_path / "out"
    code, out, err = run(capsys, "--out-dir", str(out_dir), "simulate", str(path), "--compare-classical")
    assert code == EXIT_PASS and out == ""
    rep = report((out_dir / "simulate-report.json").read_text())
    assert rep["outputs"]["csv"] == str(out_dir / "small.csv")
    assert "main_seconds" in rep["timings"]
    header = (out_dir / "small.csv").read_text().splitlines()[0]
    assert "tau_cl" in header


def test_deterministic_csv_is_byte_identical(capsys, tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(SMALL)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "--deterministic", "simulate", str(path), "--csv", str(a))[0] == EXIT_PASS
    assert run(capsys, "--deterministic", "simulate", str(path), "--csv", str(b))[0] == EXIT_PASS
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("what", ["H", "T", "xdot1"])
def test_export_round_trip(capsys, what):
    code, out, _ = run(capsys, "export", what)
    assert code == EXIT_PASS
    text = out.rstrip("\n")
    assert to_dsl(parse_operator(text)) == text
    assert parse_operator(text) == export_operator(what)


def test_export_flat_tempo(capsys, tmp_path):
    code, out, _ = run(capsys, "--out-dir", str(tmp_path), "export", "T", "--flat")
    assert code == EXIT_PASS
    e = parse_operator(out)
    assert all(not t.fields for t in e.terms())
    assert (tmp_path / "T.dsl").read_text() == out
    report((tmp_path / "export-report.json").read_text())


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "spintempo.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("spintempo ")
