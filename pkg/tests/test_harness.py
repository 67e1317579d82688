from __future__ import annotations

from pathlib import Path

from flatmu.formula import to_text
from flatmu.harness import (EXHAUSTED, MISMATCH, OK, FuzzConfig, cross_check, fuzz, run,
                            shrink, shrink_candidates)
from flatmu.oracle import OracleBounds
from flatmu.parser import parse, standard_definitions
from flatmu.problem import parse_problem
from flatmu.tableau import SolverConfig, Verdict, decide
from strategies import K

DATA = Path(__file__).parent / "data"

CTL = """\
logic k;
def AF(p) = mu x . p \\/ [] x;
def EG(p) = nu x . p /\\ <> x;
query top: true;
query contradiction: q /\\ ~q;
expect UNSAT;
query af_eg: AF(q) /\\ EG(~q);
expect UNSAT;
"""


def test_run_reports_verdicts():
    rep = run(parse_problem(CTL))
    assert [r.status for r in rep.results] == ["SAT", "UNSAT", "UNSAT"]
    assert rep.exit_code() == OK
    text = rep.render()
    assert "query top: true\n  verdict: SAT\n  model: 1 states, root s0" in text
    assert "expect: UNSAT ok" in text
    assert text.endswith("summary: 3 queries, 1 sat, 2 unsat, 0 unknown, 0 failures\n")


def test_expectation_mismatch_fails():
    rep = run(parse_problem("query a: q /\\ ~q;\nexpect SAT;"))
    assert rep.exit_code() == MISMATCH and "MISMATCH" in rep.render()


def test_unknown_is_resource_exhaustion_not_agreement():
    prob = parse_problem(CTL + "query slow: AF(q) /\\ ~q /\\ [] ~q /\\ <> true;\nexpect SAT;\n")
    rep = cross_check(prob, SolverConfig(timeout_cap=1))
    slow = rep.results[-1]
    assert slow.status == "UNKNOWN" and not slow.agrees and not slow.failed
    assert rep.exit_code() == EXHAUSTED
    assert "UNKNOWN is not counted as agreement" in rep.render()


def test_cross_check_agrees():
    rep = cross_check(parse_problem(CTL))
    assert all(r.agrees for r in rep.results)
    assert "oracle: no model within 4 states" in rep.render()


def test_empty_problem_gives_empty_report():
    rep = cross_check(parse_problem(""))
    assert rep.results == [] and rep.exit_code() == OK


def _faulty(phi, sig, config):
    """Claims UNSAT for satisfiable formulas mentioning EG."""
    v = decide(phi, sig, config)
    if v.status == "SAT" and "EG" in to_text(phi):
        return Verdict("UNSAT", "injected fault")
    return v


def test_cross_check_flags_wrong_unsat():
    prob = parse_problem(CTL + "query eg: EG(q);\n")
    rep = cross_check(prob, solver=_faulty)
    assert rep.exit_code() == MISMATCH
    assert "DISCREPANCY: solver UNSAT but the oracle found a 1-state model" in rep.render()


def test_fuzz_seed0_has_no_discrepancies():
    rep = fuzz(FuzzConfig(seed=0, cases=100))
    assert len(rep.results) == 100 and rep.failures == [] and rep.counterexamples == []


def test_fuzz_graded():
    rep = fuzz(FuzzConfig(seed=0, cases=30, logic="graded", max_fl=14),
               bounds=OracleBounds(max_states=3))
    assert rep.failures == []


def test_fuzz_degenerate_bound_is_empty():
    assert fuzz(FuzzConfig(cases=0)).results == []
    assert fuzz(FuzzConfig(max_fl=0)).results == []


def test_fuzz_is_byte_deterministic():
    a = fuzz(FuzzConfig(seed=5, cases=40)).render()
    b = fuzz(FuzzConfig(seed=5, cases=40)).render()
    assert a == b


def test_shrinking_reproduces_stored_counterexample():
    rep = fuzz(FuzzConfig(seed=7, cases=40), solver=_faulty)
    name, text = rep.counterexamples[0]
    assert name == "f8"
    assert text == (DATA / "counterexample_seed7.prob").read_text()
    # the minimized file still exposes the fault and passes with the real solver
    prob = parse_problem(text)
    assert cross_check(prob, solver=_faulty).exit_code() == MISMATCH
    assert cross_check(prob).exit_code() == OK


def test_shrink_reaches_local_minimum():
    d = standard_definitions(K)
    f = parse("(EG(q) /\\ <> r) \\/ [] AF(q)", K, d)
    small = shrink(f, lambda g: "EG" in to_text(g))
    assert to_text(small) == "EG(false)"
    assert all("EG" not in to_text(g) for g in shrink_candidates(small))
