import dataclasses
import json
import subprocess
import sys

import numpy as np
import pytest

from ginv.blocks import BlockInstance
from ginv.cli import cli_main
from ginv.harness import TARGETS
from ginv.io import block_from_json, dumps, matrix_from_json, matrix_to_json


def write_matrix(path, m):
    path.write_text(dumps(matrix_to_json(np.asarray(m, complex))))
    return path


def read(path):
    return json.loads(path.read_text())


def test_compute_example_sum(tmp_path):
    src = write_matrix(tmp_path / "m.json", [[-1, 1], [1, 1]])
    out = tmp_path / "out.json"
    assert cli_main(["compute", "--in", str(src), "--out", str(out)]) == 0
    doc = read(out)
    assert doc["status"] == "ok"
    assert np.allclose(matrix_from_json(doc["inverse"]), [[-0.5, 0.5], [0.5, 0.5]], atol=1e-12)


def test_compute_not_group_invertible(tmp_path):
    src = write_matrix(tmp_path / "n.json", [[0, 1], [0, 0]])
    out = tmp_path / "out.json"
    assert cli_main(["compute", "--in", str(src), "--out", str(out)]) == 0
    doc = read(out)
    assert doc["error"] == "NotGroupInvertible" and (doc["rank"], doc["rank_square"]) == (1, 0)


def test_compute_drazin(tmp_path, capsys):
    src = write_matrix(tmp_path / "n.json", [[0, 1], [0, 0]])
    assert cli_main(["compute", "--in", str(src), "--drazin"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["index"] == 2 and not matrix_from_json(doc["inverse"]).any()


def test_compute_rejects_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"rows": 2, "cols": 2, "data": [[0, 0], [1, 0], [0, 0]]}')
    assert cli_main(["compute", "--in", str(bad)]) == 1
    assert "data: length 3" in capsys.readouterr().err
    assert cli_main(["compute", "--in", str(tmp_path / "missing.json")]) == 1


def test_usage_errors(capsys):
    assert cli_main([]) == 1
    assert cli_main(["verify", "--target", "nope"]) == 1
    assert cli_main(["verify", "--target", "cline", "--dims", "a,b"]) == 1
    assert cli_main(["verify", "--target", "cline", "--tol", "-1"]) == 1
    assert cli_main(["verify", "--target", "cline", "--trials", "0"]) == 1
    assert cli_main(["--help"]) == 0


def test_verify_expectations(tmp_path, capsys):
    report = tmp_path / "r" / "report.json"
    argv = ["verify", "--target", "thm3.2", "--trials", "10", "--report", str(report)]
    assert cli_main(argv + ["--expect", "refuted"]) == 0
    out = capsys.readouterr().out
    assert "stated" in out and "REFUTED" in out
    doc = read(report)
    ce = report.parent / doc["verdicts"][1]["counterexample"]
    assert np.array_equal(block_from_json(read(ce)).assemble(), [[0, 1], [1, 0]])
    assert cli_main(argv + ["--expect", "verified"]) == 2
    assert cli_main(argv + ["--expect", "verified", "--variant", "corrected"]) == 0
    assert cli_main(argv + ["--expect", "verified", "--variant", "bogus"]) == 1


def test_verify_replay(tmp_path):
    report = tmp_path / "report.json"
    assert cli_main(["verify", "--target", "cor2.3", "--trials", "6", "--seed", "3",
                     "--report", str(report)]) == 0
    again = tmp_path / "again.json"
    assert cli_main(["verify", "--replay", str(report), "--report", str(again)]) == 0
    assert report.read_bytes() == again.read_bytes()


def test_tolerance_sources(tmp_path, monkeypatch):
    report = tmp_path / "r.json"
    monkeypatch.setenv("GINV_TOL", "1e-6")
    assert cli_main(["verify", "--target", "lem3.1", "--trials", "2", "--report", str(report)]) == 0
    assert read(report)["config"]["tol"] == 1e-6
    assert cli_main(["verify", "--target", "lem3.1", "--trials", "2", "--tol", "1e-7",
                     "--report", str(report)]) == 0
    assert read(report)["config"]["tol"] == 1e-7
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tolerance": {"rank_rtol": 1e-10}, "trials": 3, "seed": 8}))
    assert cli_main(["verify", "--target", "lem3.1", "--config", str(cfg), "--cond-max", "1e9",
                     "--report", str(report)]) == 0
    config = read(report)["config"]
    assert config["tolerance"] == {"rank_rtol": 1e-10, "residual_rtol": 1e-9, "cond_max": 1e9}
    assert (config["trials"], config["seed"]) == (3, 8)
    monkeypatch.setenv("GINV_TOL", "zero")
    assert cli_main(["verify", "--target", "lem3.1", "--trials", "2"]) == 1


def test_contract_violation_exit(monkeypatch):
    base = TARGETS["thm3.2"]
    monkeypatch.setitem(TARGETS, "thm3.2", dataclasses.replace(
        base, forge=lambda i, rng, dims, tol: BlockInstance(1, 1, 0, 0)))
    assert cli_main(["verify", "--target", "thm3.2", "--trials", "2", "--no-anchor"]) == 3


def test_forge_flags_and_spec(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli_main(["forge", "--kind", "thm32", "--seed", "4", "--dims", "3,2",
                     "--out", str(a)]) == 0
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"kind": "THM32", "seed": 4, "dims": [3, 2]}))
    assert cli_main(["forge", "--spec", str(spec), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    inst = block_from_json(read(a))
    assert (inst.m, inst.n) == (3, 2)
    assert cli_main(["forge", "--kind", "lambda_pair", "--dims", "4,1", "--out", str(a)]) == 0
    assert set(read(a)) == {"a", "b", "lambda"}
    assert cli_main(["forge", "--kind", "lem31", "--strategy", "search"]) == 1
    assert cli_main(["forge"]) == 1


def test_report_summary(tmp_path, capsys):
    report = tmp_path / "r.json"
    cli_main(["verify", "--target", "cor2.5", "--trials", "4", "--report", str(report)])
    capsys.readouterr()
    assert cli_main(["report", "--in", str(report)]) == 0
    out = capsys.readouterr().out
    assert "cor2.5" in out and "literal" in out and "4 trial records" in out
    junk = tmp_path / "junk.json"
    junk.write_text("{}")
    assert cli_main(["report", "--in", str(junk)]) == 1


def test_module_entry_point(tmp_path):
    src = write_matrix(tmp_path / "m.json", np.eye(2))
    proc = subprocess.run([sys.executable, "-m", "ginv", "compute", "--in", str(src)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["rank"] == 2
