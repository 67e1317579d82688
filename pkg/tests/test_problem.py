from __future__ import annotations

import pytest

from flatmu.formula import Signature
from flatmu.parser import ParseError
from flatmu.problem import parse_problem

TEXT = """\
# two agents
logic kn:1,2;
def AF(p) = mu x . p \\/ [1] x;
def CK(p) = nu x . [1] (p /\\ x) /\\ [2] (p /\\ x);
query a: AF(q) /\\ ~q;
expect SAT;
query b: CK(q) /\\ <2> ~q;
"""


def test_parse_problem():
    prob = parse_problem(TEXT)
    assert prob.sig == Signature.kn(("1", "2"))
    assert prob.declared == ["AF", "CK"]
    assert [(q.name, q.expect) for q in prob.queries] == [("a", "SAT"), ("b", None)]


def test_canonical_text_round_trips():
    prob = parse_problem(TEXT)
    text = prob.to_text()
    assert parse_problem(text).to_text() == text


def test_logic_flag_fills_in_and_conflicts():
    prob = parse_problem("query g: <{1}> p;", Signature.graded())
    assert prob.sig.kind == "graded"
    with pytest.raises(ParseError, match="declares logic"):
        parse_problem("logic k;\nquery a: p;", Signature.graded())


@pytest.mark.parametrize("text,where", [
    ("query a: p;\nexpect MAYBE;", (2, 8)),
    ("expect SAT;", (1, 1)),
    ("query a: p;\nquery a: q;", (2, 1)),
    ("query a: p", (1, 11)),
    ("query a: p;\nlogic k;", (2, 1)),
    ("logic k;\ndef F(p) = mu x . p \\/ x;", (2, 1)),
])
def test_errors_carry_positions(text, where):
    with pytest.raises(ParseError) as e:
        parse_problem(text)
    assert (e.value.line, e.value.col) == where


def test_empty_problem():
    prob = parse_problem("# nothing here\n")
    assert prob.queries == [] and prob.sig.kind == "k"
