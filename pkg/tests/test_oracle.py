from __future__ import annotations

from hypothesis import given, settings

from flatmu.formula import TOP, Signature, conj, nprop, prop
from flatmu.oracle import OracleBounds, brute_force_sat, sat_search
from flatmu.parser import parse, standard_definitions
from flatmu.randgen import graded_suite_definitions
from flatmu.semantics import holds
from strategies import GRADED, K, K2, formulas

D = standard_definitions(K)


def test_oracle_examples():
    m, s = brute_force_sat(TOP, K)
    assert m.n == 1 and s == 0
    assert brute_force_sat(conj(prop("p"), nprop("p")), K) is None
    f = parse("AF(q) /\\ EG(~q)", K, D)
    for engine in ("enumerate", "sat"):
        assert brute_force_sat(f, K, OracleBounds(max_states=4, engine=engine)) is None


def test_oracle_graded_examples():
    gd = graded_suite_definitions()
    f = parse("TREE(p) /\\ ~p", GRADED, gd)
    m, s = brute_force_sat(f, GRADED, OracleBounds(max_states=3))
    assert holds(m, f, s)
    g = parse("<{1}> p /\\ [{1}] ~p", GRADED, gd)
    assert brute_force_sat(g, GRADED, OracleBounds(max_states=3)) is None


def _found(f, sig, engine, n=2, mult=2):
    hit = brute_force_sat(f, sig, OracleBounds(max_states=n, max_multiplicity=mult, engine=engine))
    if hit is not None:
        m, s = hit
        assert holds(m, f, s)
    return hit is not None


@settings(max_examples=120, deadline=None)
@given(formulas(K))
def test_engines_agree_k(f):
    assert _found(f, K, "enumerate") == _found(f, K, "sat")


@settings(max_examples=60, deadline=None)
@given(formulas(K2, atoms=("a",)))
def test_engines_agree_multi_agent(f):
    assert _found(f, K2, "enumerate") == _found(f, K2, "sat")


@settings(max_examples=60, deadline=None)
@given(formulas(GRADED, atoms=("p",)))
def test_engines_agree_graded(f):
    assert _found(f, GRADED, "enumerate") == _found(f, GRADED, "sat")


def test_sat_search_fixed_size():
    f = parse("<> q /\\ [] <> ~q", K, D)
    m, s = sat_search(f, "kripke", 2, ["q"])
    assert m.n == 2 and holds(m, f, s)
    assert sat_search(f, "kripke", 1, ["q"]) is None
