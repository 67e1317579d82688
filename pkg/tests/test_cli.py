from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

from flatmu.cli import main

ROOT = Path(__file__).resolve().parent.parent
PROBLEMS = ROOT / "problems"


def test_solve_exit_zero(capsys):
    assert main(["solve", str(PROBLEMS / "ctl.prob")]) == 0
    out = capsys.readouterr().out
    assert "query af_eg: AF(q) /\\ EG(~q)\n  verdict: UNSAT" in out
    assert "time:" not in out


def test_check_graded(capsys):
    assert main(["check", str(PROBLEMS / "graded.prob"), "--oracle-states", "3"]) == 0
    assert "0 failures" in capsys.readouterr().out


def test_timing_flag(capsys):
    main(["solve", str(PROBLEMS / "ctl.prob"), "--timing", "--no-stats"])
    out = capsys.readouterr().out
    assert "time:" in out and "fl_size" not in out


def test_usage_and_parse_errors(tmp_path, capsys):
    assert main([]) == 2
    assert main(["solve", str(tmp_path / "missing.prob")]) == 2
    bad = tmp_path / "bad.prob"
    bad.write_text("query a: p /\\ ;\n")
    assert main(["solve", str(bad)]) == 2
    assert "line 1, column 15" in capsys.readouterr().err
    assert main(["solve", str(bad), "--logic", "lukasiewicz"]) == 2


def test_mismatch_exit(tmp_path):
    f = tmp_path / "m.prob"
    f.write_text("query a: q /\\ ~q;\nexpect SAT;\n")
    assert main(["solve", str(f)]) == 1


def test_exhaustion_exit(tmp_path):
    f = tmp_path / "x.prob"
    f.write_text("def AF(p) = mu x . p \\/ [] x;\nquery a: AF(q) /\\ ~q /\\ [] ~q /\\ <> true;\n")
    assert main(["solve", str(f), "--timeout-cap", "1"]) == 3
    assert main(["solve", str(f), "--node-cap", "1"]) == 3


def test_dump_and_emit(tmp_path):
    dot, js = tmp_path / "t.dot", tmp_path / "m.json"
    f = tmp_path / "one.prob"
    f.write_text("query a: <> q /\\ [] r;\n")
    assert main(["solve", str(f), "--dump-tableau", str(dot), "--emit-model", str(js)]) == 0
    assert dot.read_text().startswith("digraph tableau {")
    model = json.loads(js.read_text())
    assert model["kind"] == "kripke" and model["states"] == 2


def test_fuzz_command_deterministic(tmp_path):
    args = [sys.executable, "-m", "flatmu", "fuzz", "--cases", "25", "--seed", "3"]
    a = subprocess.run(args, capture_output=True, check=True).stdout
    b = subprocess.run(args, capture_output=True, check=True).stdout
    assert a == b and b"0 failures" in a
