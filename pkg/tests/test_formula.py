from __future__ import annotations

import pytest
from hypothesis import given, settings

from flatmu.formula import (BOT, P, TOP, X, FixpointDef, Signature, box, check_admissible,
                            check_guarded, check_monotone, conj, diamond, disj, dual,
                            fischer_ladner, gdiamond, grade_cost, modal, mu, negate, nprop, nu,
                            nvar, prop, size, strip, subformulas, substitute, to_text,
                            uniform_depth, var)
from flatmu.parser import ParseError, parse, standard_definitions
from strategies import GRADED, K, K2, formulas

x, p, q = var(X), var(P), prop("q")
AF_BODY = disj(p, modal(box(), x))
EG_BODY = conj(p, modal(diamond(), x))
AF = FixpointDef(AF_BODY)


def test_hash_consing():
    assert conj(q, prop("r")) is conj(q, prop("r"))
    assert mu(AF, q) is mu(FixpointDef(AF_BODY), q)
    assert mu(AF, q, 3) is not mu(AF, q)


def test_negate_examples():
    assert negate(TOP) is BOT
    f = conj(modal(box(), prop("p")), modal(diamond(), q))
    assert negate(f) is disj(modal(diamond(), nprop("p")), modal(box(), nprop("q")))
    g = negate(mu(AF, q))
    assert g.op == "nu" and g.fdef is AF and g.arg is nprop("q")
    assert g.fdef.dual_body is EG_BODY


def test_dual_examples():
    assert dual(x) is x
    assert dual(AF_BODY) is EG_BODY
    au = disj(var("p"), conj(prop("a"), modal(box(), x)))
    assert dual(au) is conj(var("p"), disj(nprop("a"), modal(diamond(), x)))


def test_substitute_examples():
    assert substitute(AF_BODY, BOT, q) is disj(q, modal(box(), BOT))
    assert substitute(AF_BODY, mu(AF, q), q) is disj(q, modal(box(), mu(AF, q)))
    tree = disj(p, modal(gdiamond(1), x))
    assert substitute(tree, TOP, p) is disj(p, modal(gdiamond(1), TOP))


@pytest.mark.parametrize("body,guarded", [
    (AF_BODY, True),
    (disj(x, modal(box(), x)), False),
    (modal(diamond(), conj(p, modal(diamond(), x))), True),
])
def test_check_guarded(body, guarded):
    assert check_guarded(body) is guarded


@pytest.mark.parametrize("body,monotone", [
    (AF_BODY, True),
    (disj(nvar(P), modal(box(), x)), False),
    (modal(box(), conj(x, nvar(X))), False),
])
def test_check_monotone(body, monotone):
    assert check_monotone(body) is monotone


def test_uniform_depth():
    assert uniform_depth(AF_BODY) == 1
    bd = conj(modal(box(), modal(diamond(), x)), modal(diamond(), modal(box(), x)))
    assert uniform_depth(bd) == 2
    assert uniform_depth(disj(x, modal(box(), x))) is None
    assert uniform_depth(p) == 0


def test_check_admissible():
    assert check_admissible(AF_BODY)
    mixed = disj(conj(p, modal(diamond(), x)), modal(box(), modal(box(), x)))
    assert check_admissible(mixed)
    assert not check_admissible(disj(modal(diamond(), x), x))


def test_size_convention():
    assert size(TOP) == 1
    assert grade_cost(1) == 2
    assert size(modal(gdiamond(1), TOP)) == 4
    assert size(modal(box(), prop("p"))) == 2
    assert size(mu(AF, q)) == 1 + size(AF_BODY) + 1


def test_fischer_ladner_examples():
    assert fischer_ladner(TOP) == {TOP, BOT}
    af = mu(AF, q)
    core = {af, disj(q, modal(box(), af)), q, modal(box(), af)}
    assert fischer_ladner(af) == core | {negate(f) for f in core}
    ag = FixpointDef(dual(conj(p, modal(box(), x))))
    f = conj(q, nu(ag, q))
    assert conj(q, modal(box(), nu(ag, q))) in fischer_ladner(f)


def _closed(sigma) -> bool:
    for f in sigma:
        if negate(f) not in sigma:
            return False
        if f.op in ("and", "or"):
            if f.left not in sigma or f.right not in sigma:
                return False
        elif f.op == "mod" and f.arg not in sigma:
            return False
        elif f.is_fix and f.fdef.unfold(f) not in sigma:
            return False
    return True


@settings(max_examples=300, deadline=None)
@given(formulas(K))
def test_fl_closed_and_quadratic(f):
    sigma = fischer_ladner(f)
    assert f in sigma and _closed(sigma)
    assert len(sigma) <= 2 * size(f) ** 2


@settings(max_examples=200, deadline=None)
@given(formulas(GRADED))
def test_fl_closed_graded(f):
    sigma = fischer_ladner(f)
    g = max((m.mod.index for m in subformulas(f) if m.op == "mod"), default=0)
    assert _closed(sigma)
    assert len(sigma) <= 2 * (1 + g) * size(f) ** 2


@settings(max_examples=500, deadline=None)
@given(formulas(K2, atoms=("a", "b", "q")))
def test_negate_involution_multi_agent(f):
    assert negate(negate(f)) is f


@settings(max_examples=500, deadline=None)
@given(formulas(K, atoms=("a", "q")))
def test_dual_involution_on_bodies(f):
    # fixed point free modal formulas, with the atoms a and q read as x and p
    from hypothesis import assume
    from flatmu.formula import has_fixpoints
    assume(not has_fixpoints(f))
    body = _as_body(f)
    assert dual(dual(body)) is body


def _as_body(f):
    op = f.op
    if op in ("prop", "nprop") and f.name in ("a", "q"):
        v = X if f.name == "a" else P
        return var(v) if op == "prop" else nvar(v)
    if op in ("and", "or"):
        return (conj if op == "and" else disj)(_as_body(f.left), _as_body(f.right))
    if op == "mod":
        return modal(f.mod, _as_body(f.arg))
    return f


def test_strip_erases_timeouts():
    assert strip(mu(AF, q, 3)) is mu(AF, q)
    assert strip(modal(box(), mu(AF, q, 1))) is modal(box(), mu(AF, q))


# parser

D = standard_definitions(K)


def test_parse_examples():
    f = parse("mu x . q \\/ [] x", K, D)
    assert f is mu(AF, q)
    assert to_text(f) == "AF(q)"
    g = parse("~(AF(q))", K, D)
    assert g is nu(AF, nprop("q"))
    assert to_text(g) == "EG(~q)"
    assert parse("<{2}> true", GRADED) is modal(gdiamond(2), TOP)


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as e:
        parse("q /\\ (r", K, D)
    assert (e.value.line, e.value.col) == (1, 8)
    with pytest.raises(ParseError, match="unknown"):
        parse("NOPE(q)", K, D)
    with pytest.raises(ParseError):
        parse("AF(q, r)", K, D)
    with pytest.raises(ParseError):
        parse("[1] q", K, D)


def test_parse_rejects_unguarded_binder():
    with pytest.raises(ParseError):
        parse("mu x . q \\/ x", K, D)


@settings(max_examples=400, deadline=None)
@given(formulas(K))
def test_print_parse_round_trip(f):
    assert parse(to_text(f), K, standard_definitions(K)) is f


@settings(max_examples=200, deadline=None)
@given(formulas(GRADED))
def test_print_parse_round_trip_graded(f):
    from flatmu.randgen import graded_suite_definitions
    assert parse(to_text(f), GRADED, graded_suite_definitions()) is f


@settings(max_examples=200, deadline=None)
@given(formulas(K2, atoms=("a", "b")))
def test_print_parse_round_trip_multi_agent(f):
    assert parse(to_text(f), K2) is f
