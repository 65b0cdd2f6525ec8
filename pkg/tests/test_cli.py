import json

import pytest

from lrfs import cli, fixtures, scenario
from lrfs.errors import DegenerateUpdateError


def call(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_default_is_oracle(capsys):
    code, out, _ = call(capsys, "run")
    assert code == 0 and "track segments:" in out


def test_run_records_to_file(tmp_path, capsys):
    path = tmp_path / "out.jsonl"
    code, out, _ = call(capsys, "run", "--config", str(scenario.SCENARIO_DIR / "oracle.toml"), "--format", "records", "--out", str(path))
    assert code == 0 and out == ""
    kinds = {json.loads(line)["kind"] for line in path.read_text().splitlines()}
    assert kinds == {"measurements", "truth", "estimate", "posterior", "distance", "track_segments"}


def test_seed_override_changes_simulation(capsys):
    cfg = str(scenario.SCENARIO_DIR / "cluttered.toml")
    _, a, _ = call(capsys, "simulate", "--config", cfg, "--seed", "1", "--format", "records")
    _, b, _ = call(capsys, "simulate", "--config", cfg, "--seed", "2", "--format", "records")
    _, a2, _ = call(capsys, "simulate", "--config", cfg, "--seed", "1", "--format", "records")
    assert a == a2 and a != b


def test_report(capsys):
    code, out, _ = call(capsys, "report", "--config", str(scenario.SCENARIO_DIR / "dropout.toml"))
    assert code == 0 and "1:1: 2 3 4 - 6 7 8 9" in out
    code, out, _ = call(capsys, "report", "--format", "records")
    assert json.loads(out.splitlines()[0])["segments_match_truth"] is True


def test_audit_pass(capsys):
    code, out, _ = call(capsys, "audit")
    assert code == 0 and out.count("PASS") == 8


def test_audit_failure_exit(monkeypatch, capsys):
    monkeypatch.setattr(fixtures, "AUDIT_CHECKS", fixtures.AUDIT_CHECKS + (("BROKEN", lambda: (False, "forced")),))
    code, out, _ = call(capsys, "audit", "--format", "records")
    assert code == 1 and '"passed": false' in out


def test_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("horizon = 2\n[grid]\nshape = [3]\n[sensor]\np_detection = 1.3\n")
    code, _, err = call(capsys, "run", "--config", str(bad))
    assert code == 2 and "sensor.p_detection" in err
    bad.write_text("horizon = \n")
    code, _, err = call(capsys, "run", "--config", str(bad))
    assert code == 2 and "line 1" in err
    code, _, _ = call(capsys, "run", "--config", str(tmp_path / "missing.toml"))
    assert code == 2


def test_degenerate_exit(monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise DegenerateUpdateError("forced")

    monkeypatch.setattr(scenario, "update", boom)
    code, _, err = call(capsys, "run")
    assert code == 3 and "degenerate" in err


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "lrfs", "audit"], capture_output=True, text=True)
    assert proc.returncode == 0 and "CE4" in proc.stdout
