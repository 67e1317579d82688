"""Acceptance criteria, one test each; every test records a PASS/FAIL line
that is printed in the terminal summary."""
from __future__ import annotations

import itertools
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from flatmu.formula import (P, X, Formula, Signature, conj, disj, dual, fischer_ladner, gbox,
                            gdiamond, modal, mu, negate, nprop, nu, prop, size, strip,
                            subformulas, var)
from flatmu.oracle import OracleBounds, brute_force_sat
from flatmu.parser import parse, standard_definitions
from flatmu.randgen import (FormulaGenerator, Shape, graded_suite, graded_suite_definitions,
                            k_suite)
from flatmu.rules import all_demands
from flatmu.semantics import BatchModels, holds
from flatmu.tableau import SolverConfig, decide
from flatmu.timed import is_timed_formula, timed_leq

K, K2, G = Signature.k(), Signature.kn(("1", "2")), Signature.graded()


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _run_suite(formulas, sig, config_factory=SolverConfig):
    out = []
    for f in formulas:
        out.append(decide(f, sig, config_factory()))
    return out


def _fingerprint(v) -> tuple:
    stats = {k: v.stats[k] for k in sorted(v.stats) if k != "seconds"}
    model = v.model.to_json() if v.model is not None else None
    return (v.status, v.reason, tuple(stats.items()), model)


@pytest.fixture(scope="module")
def suite1():
    formulas = k_suite(500, seed=0)
    timed: set = set()
    start = time.perf_counter()
    verdicts = [decide(f, K, SolverConfig(record=timed)) for f in formulas]
    oracle = [brute_force_sat(f, K, OracleBounds(max_states=4)) for f in formulas]
    seconds = time.perf_counter() - start
    return formulas, verdicts, oracle, timed, seconds


@pytest.fixture(scope="module")
def suite3():
    formulas = graded_suite(200, seed=0)
    start = time.perf_counter()
    verdicts = [decide(f, G) for f in formulas]
    oracle = [brute_force_sat(f, G, OracleBounds(max_states=3, max_multiplicity=3))
              for f in formulas]
    seconds = time.perf_counter() - start
    return formulas, verdicts, oracle, seconds


# 1 -------------------------------------------------------------------------

def test_criterion_1_oracle_agreement(suite1):
    formulas, verdicts, oracle, _, seconds = suite1
    bad_a = bad_b = bad_c = 0
    unknown = 0
    for f, v, o in zip(formulas, verdicts, oracle):
        if v.status == "SAT":
            model_ok = holds(v.model, f)
            bad_a += not model_ok
            bad_b += not (o is not None or (v.model.n <= 4 and model_ok))
        elif v.status == "UNSAT":
            bad_c += o is not None
        else:
            unknown += 1
    assert max(len(fischer_ladner(f)) for f in formulas) <= 10
    assert all(len(_atoms(f)) <= 2 for f in formulas)
    ok = bad_a == bad_b == bad_c == 0 and seconds < 120
    sat = sum(v.status == "SAT" for v in verdicts)
    record(1, ok, f"500 K formulas: {sat} sat, {500 - sat - unknown} unsat, {unknown} unknown; "
                  f"violations a={bad_a} b={bad_b} c={bad_c}; {seconds:.1f}s < 120s")
    assert ok


def _atoms(f: Formula) -> set:
    from flatmu.formula import atoms_of
    out = set(atoms_of(f))
    for g in subformulas(f):
        if g.is_fix:
            out |= atoms_of(g.fdef.body)
    return out


# 2 -------------------------------------------------------------------------

def _iff(a: Formula, b: Formula) -> Formula:
    return conj(disj(negate(a), b), disj(negate(b), a))


def _batches(n_max: int, atoms, agents):
    for n in range(1, n_max + 1):
        yield BatchModels.all_kripke(n, atoms, agents)


def _valid(f: Formula, batches) -> bool:
    return all(np.all(b.evaluate(f) == b.full) for b in batches)


def test_criterion_2_validity_regression():
    atoms = ("a", "q")
    batches = list(_batches(3, atoms, ("",)))
    defs = standard_definitions(K)
    args = [prop("a"), prop("q"), nprop("q"), conj(prop("a"), prop("q"))]
    checked, failures = 0, []
    for name, (kind, fd) in defs:
        make = mu if kind == "mu" else nu
        for psi in args:
            f = make(fd, psi)
            axiom = _iff(f, fd.unfold(f))
            checked += 1
            if not _valid(axiom, batches):
                failures.append(f"{name}({psi})")
    models = sum(b.size for b in batches)
    af_eg = parse("AF(q) /\\ EG(~q)", K, defs)
    unsat_solver = decide(af_eg, K).status == "UNSAT"
    unsat_models = all(not np.any(b.evaluate(af_eg)) for b in batches)

    # common knowledge on two-agent models, frames x valuations of p
    kdefs = standard_definitions(K2)
    ck_fd = kdefs.lookup("CK")[1]
    two = list(_batches(3, ("p",), ("1", "2")))
    ck = nu(ck_fd, prop("p"))
    ck_unfold = _iff(ck, ck_fd.unfold(ck))
    ck_ok = all(not np.any(b.evaluate(conj(ck, modal(_diamond1(), nprop("p"))))) for b in two)
    ck_unfold_ok = _valid(ck_unfold, two)
    two_models = sum(b.size for b in two)

    ok = not failures and unsat_solver and unsat_models and ck_ok and ck_unfold_ok
    record(2, ok, f"{checked} unfolding instances on {models} Kripke models (<= 3 states, 2 atoms)"
                  f"{', failing ' + ', '.join(failures) if failures else ''}; "
                  f"AFq/\\EG~q unsat: solver={unsat_solver} models={unsat_models}; "
                  f"[[C p]] within [[K1 p]] and C unfolding on {two_models} two-agent models: "
                  f"{ck_ok and ck_unfold_ok}")
    assert ok


def _diamond1():
    from flatmu.formula import diamond
    return diamond("1")


# 3 -------------------------------------------------------------------------

def test_criterion_3_graded(suite3):
    gd = graded_suite_definitions()
    tree = parse("TREE(p)", G, gd)
    v = decide(tree, G)
    tree_ok = v.status == "SAT" and holds(v.model, tree)
    tree_inner = parse("TREE(p) /\\ ~p", G, gd)
    w = decide(tree_inner, G)
    tree_ok = tree_ok and w.status == "SAT" and holds(w.model, tree_inner)

    lits = [modal(gdiamond(0), prop("p")), modal(gbox(0), nprop("p"))]
    ds, _ = all_demands(lits, G)
    bot_demand = any(d.is_bot and d.rule_id == "G[r=1;k=0|s=1;l=0]" for d in ds)
    clash = decide(conj(*lits), G)
    t = clash.tableau
    pruned = clash.status == "UNSAT" and all(
        any(d.is_bot for d, _ in (t.edges[i] or ())) for i in t.roots)

    formulas, verdicts, oracle, seconds = suite3
    discrepancies = unknown = beyond = 0
    for f, r, o in zip(formulas, verdicts, oracle):
        if r.status == "UNSAT":
            discrepancies += o is not None
        elif r.status == "SAT":
            if not holds(r.model, f):
                discrepancies += 1
            elif o is None:
                small = r.model.n <= 3 and max(
                    (k for row in r.model.mult for k in row.values()), default=0) <= 3
                discrepancies += small
                beyond += not small
        else:
            unknown += 1
    ok = tree_ok and bot_demand and pruned and discrepancies == 0 and seconds < 300
    record(3, ok, f"sharp(p \\/ <1>x) sat and model-checked: {tree_ok}; "
                  f"{{<0>p, [0]~p}} bottom demand: {bot_demand}, root pruned: {pruned}; "
                  f"200 graded formulas: {discrepancies} discrepancies, {unknown} unknown, "
                  f"{beyond} models beyond the oracle bound; {seconds:.1f}s < 300s")
    assert ok


# 4 -------------------------------------------------------------------------

def _as_body(f: Formula) -> Formula:
    op = f.op
    if op in ("prop", "nprop") and f.name in ("q", "r"):
        v = X if f.name == "q" else P
        return var(v) if op == "prop" else nvar_(v)
    if op in ("and", "or"):
        return (conj if op == "and" else disj)(_as_body(f.left), _as_body(f.right))
    if op == "mod":
        return modal(f.mod, _as_body(f.arg))
    return f


def nvar_(v):
    from flatmu.formula import nvar
    return nvar(v)


def test_criterion_4_structural(suite1, suite3):
    from flatmu.formula import has_fixpoints
    # involutions over 10^4 random formulas from three signatures
    gens = [
        FormulaGenerator(K, standard_definitions(K), Shape(depth=5, max_fl=10 ** 6), seed=11),
        FormulaGenerator(K2, standard_definitions(K2), Shape(depth=5, max_fl=10 ** 6), seed=12),
        FormulaGenerator(G, graded_suite_definitions(), Shape(depth=5, atoms=("q", "r"),
                                                              max_fl=10 ** 6), seed=13),
    ]
    negate_bad = dual_bad = bodies = 0
    for i in range(10_000):
        f = gens[i % 3].formula()
        negate_bad += negate(negate(f)) is not f
        if not has_fixpoints(f):
            body = _as_body(f)
            bodies += 1
            dual_bad += dual(dual(body)) is not body

    # FL closure and size on the corpus
    corpus = list(suite1[0]) + list(suite3[0])
    fl_bad = 0
    for f in corpus:
        sigma = fischer_ladner(f)
        g = max((m.mod.index for m in subformulas(f) if m.op == "mod" and m.mod.graded),
                default=0)
        closed = all(negate(h) in sigma for h in sigma) and all(
            all(a in sigma for a in h.args) and (not h.is_fix or h.fdef.unfold(h) in sigma)
            for h in sigma)
        fl_bad += not closed or len(sigma) > 2 * (1 + g) * size(f) ** 2

    # linear fibers and stability on every timed formula from suite 1
    _, verdicts, _, timed, _ = suite1
    fibers: dict = {}
    invalid = 0
    for h in timed:
        invalid += not is_timed_formula(h)
        fibers.setdefault(strip(h), []).append(h)
    nonlinear = sum(1 for grp in fibers.values() for a, b in itertools.combinations(grp, 2)
                    if not (timed_leq(a, b) or timed_leq(b, a)))
    violations = sum(v.stats["stability_violations"] for v in verdicts)

    ok = negate_bad == dual_bad == fl_bad == nonlinear == violations == invalid == 0
    record(4, ok, f"negate involution 10000 formulas: {negate_bad} failures; dual involution "
                  f"{bodies} bodies: {dual_bad} failures; FL closed and <= 2(1+g)|f|^2 on "
                  f"{len(corpus)} formulas: {fl_bad} failures; {len(timed)} timed formulas in "
                  f"{len(fibers)} fibers: {nonlinear} incomparable pairs; stability "
                  f"violations: {violations + invalid}")
    assert ok


# 5 -------------------------------------------------------------------------

def test_criterion_5_determinism_and_budgets(suite1, suite3):
    runs = [(suite1[0], K, suite1[1]), (suite3[0], G, suite3[1])]
    differ = budget_diff = compared = 0
    for formulas, sig, first in runs:
        second = _run_suite(formulas, sig)
        differ += sum(_fingerprint(a) != _fingerprint(b) for a, b in zip(first, second))
        for f in formulas:
            b = len(fischer_ladner(f))
            small = decide(f, sig, SolverConfig(timeout_cap=b))
            if small.status == "UNKNOWN":
                continue
            big = decide(f, sig, SolverConfig(timeout_cap=2 * b))
            compared += 1
            budget_diff += small.status != big.status
    ok = differ == 0 and budget_diff == 0
    record(5, ok, f"700 formulas run twice: {differ} differing verdicts or statistics; "
                  f"caps B=|FL| and 2B on {compared} decided formulas: {budget_diff} changes")
    assert ok
