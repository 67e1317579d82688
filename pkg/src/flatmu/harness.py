"""Batch runs, oracle cross-checking and fuzzing over problem files.

Reports render to text deterministically; wall times appear only when
asked for, so two runs with the same seed and configuration print the same
bytes.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .formula import (BOT, TOP, Formula, Signature, conj, disj, fischer_ladner, modal, mu, nu,
                      size, sort_key, subformulas, to_text)
from .oracle import OracleBounds, brute_force_sat
from .parser import Definitions
from .problem import ProblemFile, Query
from .randgen import FormulaGenerator, Shape, graded_suite_definitions, k_suite_definitions
from .semantics import ConcreteModel, evaluate
from .tableau import SolverConfig, Verdict, decide, format_stats

Solver = Callable[[Formula, Signature, SolverConfig], Verdict]

# exit codes
OK, MISMATCH, USAGE, EXHAUSTED = 0, 1, 2, 3


@dataclass
class QueryResult:
    name: str
    formula: Formula
    verdict: Verdict
    expect: Optional[str] = None
    seconds: float = 0.0
    model_ok: Optional[bool] = None  # independent re-evaluation of a SAT model
    oracle: Optional[tuple] = None  # (model, state) or None once consulted
    oracle_run: bool = False
    oracle_states: int = 0
    problems: list = field(default_factory=list)  # discrepancies and mismatches
    notes: list = field(default_factory=list)

    @property
    def status(self) -> str:
        return self.verdict.status

    @property
    def failed(self) -> bool:
        return bool(self.problems)

    @property
    def agrees(self) -> bool:
        """Solver and oracle agree; UNKNOWN never counts."""
        return self.oracle_run and not self.problems and self.status != "UNKNOWN"


@dataclass
class Report:
    title: str
    results: list = field(default_factory=list)
    timing: bool = False
    extra: list = field(default_factory=list)  # trailing lines, e.g. counterexamples
    counterexamples: list = field(default_factory=list)  # (query name, problem file text)

    @property
    def failures(self) -> list:
        return [r for r in self.results if r.failed]

    @property
    def unknown(self) -> list:
        return [r for r in self.results if r.status == "UNKNOWN"]

    def exit_code(self) -> int:
        if self.failures:
            return MISMATCH
        if self.unknown:
            return EXHAUSTED
        return OK

    def render(self, stats: bool = True) -> str:
        out = [f"# {self.title}"]
        for r in self.results:
            out.append(f"query {r.name}: {to_text(r.formula)}")
            out.append(f"  verdict: {r.verdict}")
            if r.expect:
                ok = "ok" if r.expect == r.status else "MISMATCH"
                out.append(f"  expect: {r.expect} {ok}")
            if r.verdict.model is not None and r.status == "SAT":
                out.extend("  " + line for line in model_text(r.verdict.model))
            if r.oracle_run:
                if r.oracle is None:
                    out.append(f"  oracle: no model within {r.oracle_states} states")
                else:
                    out.append(f"  oracle: model with {r.oracle[0].n} states")
            out.extend(f"  note: {n}" for n in r.notes)
            out.extend(f"  DISCREPANCY: {p}" for p in r.problems)
            if stats:
                out.extend("  " + line for line in format_stats(r.verdict.stats).splitlines())
            if self.timing:
                out.append(f"  time: {r.seconds:.3f}s")
        counts = {s: sum(r.status == s for r in self.results) for s in ("SAT", "UNSAT", "UNKNOWN")}
        out.append(f"summary: {len(self.results)} queries, {counts['SAT']} sat, "
                   f"{counts['UNSAT']} unsat, {counts['UNKNOWN']} unknown, "
                   f"{len(self.failures)} failures")
        out.extend(self.extra)
        return "\n".join(out) + "\n"


def model_text(m: ConcreteModel) -> list:
    """One line per state: valuation, then successors."""
    lines = [f"model: {m.n} states, root s{m.root}"]
    for s in range(m.n):
        true = sorted(a for a, v in m.valuation.items() if v >> s & 1)
        head = f"s{s} {{{', '.join(true)}}}"
        if m.kind == "kripke":
            parts = []
            for a in m.agents:
                succ = " ".join(f"s{t}" for t in m.states_of(m.succ[a][s]))
                arrow = "->" if a == "" else f"-{a}->"
                parts.append(f"{arrow} {succ or '.'}")
            lines.append(f"  {head} " + " ".join(parts))
        else:
            succ = " ".join(f"s{t}*{k}" for t, k in sorted(m.mult[s].items()))
            lines.append(f"  {head} -> {succ or '.'}")
    return lines


def _solve(q: Query, sig: Signature, config: SolverConfig, solver: Solver) -> QueryResult:
    start = time.perf_counter()
    v = solver(q.formula, sig, config)
    r = QueryResult(q.name, q.formula, v, q.expect, time.perf_counter() - start)
    if v.status == "SAT" and v.model is not None:
        r.model_ok = bool(evaluate(v.model, q.formula) >> v.model.root & 1)
        if not r.model_ok:
            r.problems.append("extracted model does not satisfy the query at its root")
    if q.expect and v.status != "UNKNOWN" and v.status != q.expect:
        r.problems.append(f"expected {q.expect}, solver answered {v.status}")
    if q.expect and v.status == "UNKNOWN":
        r.notes.append(f"expectation {q.expect} not decided")
    return r


def run(problem: ProblemFile, config: Optional[SolverConfig] = None, solver: Solver = decide,
        timing: bool = False) -> Report:
    """Solve every query in file order."""
    config = config or SolverConfig()
    rep = Report(f"run: {len(problem.queries)} queries, logic {problem.sig.flag}", timing=timing)
    for q in problem.queries:
        rep.results.append(_solve(q, problem.sig, config, solver))
    return rep


def _compare(r: QueryResult, sig: Signature, bounds: OracleBounds) -> None:
    r.oracle_run = True
    r.oracle_states = bounds.max_states
    r.oracle = brute_force_sat(r.formula, sig, bounds)
    found = r.oracle is not None
    if r.status == "UNSAT" and found:
        r.problems.append(f"solver UNSAT but the oracle found a {r.oracle[0].n}-state model")
    elif r.status == "SAT" and not found:
        m = r.verdict.model
        if m is not None and m.n <= bounds.max_states and bounds.max_multiplicity >= _max_mult(m):
            r.problems.append("oracle found no model although the extracted one is within bounds")
        else:
            r.notes.append("extracted model lies beyond the oracle bound")
    elif r.status == "UNKNOWN":
        r.notes.append("oracle " + ("found a model" if found else "found no model")
                       + "; UNKNOWN is not counted as agreement")


def _max_mult(m: ConcreteModel) -> int:
    if m.kind != "multigraph":
        return 0
    return max((k for row in m.mult for k in row.values()), default=0)


def cross_check(problem: ProblemFile, config: Optional[SolverConfig] = None,
                bounds: OracleBounds = OracleBounds(), solver: Solver = decide,
                timing: bool = False) -> Report:
    """Solve every query and compare against the small-model oracle."""
    config = config or SolverConfig()
    rep = Report(f"check: {len(problem.queries)} queries, logic {problem.sig.flag}, "
                 f"oracle <= {bounds.max_states} states", timing=timing)
    for q in problem.queries:
        r = _solve(q, problem.sig, config, solver)
        _compare(r, problem.sig, bounds)
        rep.results.append(r)
    return rep


# ---------------------------------------------------------------------------
# fuzzing

@dataclass(frozen=True)
class FuzzConfig:
    seed: int = 0
    cases: int = 100
    logic: str = "k"  # k | graded
    depth: int = 3
    max_fl: int = 10


def fuzz_definitions(logic: str) -> Definitions:
    if logic == "k":
        return k_suite_definitions()
    if logic == "graded":
        return graded_suite_definitions()
    raise ValueError(f"fuzzing supports k and graded, not {logic!r}")


def shrink_candidates(f: Formula) -> list:
    """Formulas one step simpler than ``f``: a subterm replaced by a child,
    by true or by false.  Ordered smallest first, all below ``f``."""
    out = set()

    def rec(g: Formula, rebuild) -> None:
        for c in (TOP, BOT):
            if g is not c:
                out.add(rebuild(c))
        op = g.op
        if op in ("and", "or"):
            a, b = g.left, g.right
            make = conj if op == "and" else disj
            out.add(rebuild(a))
            out.add(rebuild(b))
            rec(a, lambda h: rebuild(make(h, b)))
            rec(b, lambda h: rebuild(make(a, h)))
        elif op == "mod":
            out.add(rebuild(g.arg))
            rec(g.arg, lambda h: rebuild(modal(g.mod, h)))
        elif g.is_fix:
            out.add(rebuild(g.arg))
            make = mu if op == "mu" else nu
            rec(g.arg, lambda h: rebuild(make(g.fdef, h)))

    rec(f, lambda h: h)
    rank = lambda h: (size(h), sort_key(h))
    # strictly decreasing rank, so greedy shrinking terminates
    return sorted((h for h in out if rank(h) < rank(f)), key=rank)


def shrink(f: Formula, failing: Callable[[Formula], bool], limit: int = 200) -> Formula:
    """Greedy descent to a locally minimal formula that still fails."""
    for _ in range(limit):
        for g in shrink_candidates(f):
            if failing(g):
                f = g
                break
        else:
            return f
    return f


def counterexample_file(f: Formula, sig: Signature, defs: Definitions, r: QueryResult) -> str:
    """A self-contained problem file reproducing a discrepancy."""
    used = {g.fdef for g in subformulas(f) if g.is_fix}
    prob = ProblemFile(sig, defs)
    prob.declared = [name for name, (_, fd) in defs if fd in used]
    expect = None
    if r.oracle_run:
        expect = "SAT" if r.oracle is not None else None
    prob.queries = [Query("counterexample", f, expect)]
    head = [f"# solver: {r.verdict}"]
    head += [f"# {p}" for p in r.problems]
    return "\n".join(head) + "\n" + prob.to_text()


def fuzz(fc: FuzzConfig = FuzzConfig(), config: Optional[SolverConfig] = None,
         bounds: OracleBounds = OracleBounds(), solver: Solver = decide,
         timing: bool = False) -> Report:
    """Cross-check ``fc.cases`` seeded random formulas; discrepancies are
    shrunk and appended to the report as minimized problem files."""
    config = config or SolverConfig()
    sig = Signature.from_flag(fc.logic)
    defs = fuzz_definitions(fc.logic)
    rep = Report(f"fuzz: seed {fc.seed}, {fc.cases} cases, logic {fc.logic}, depth {fc.depth}, "
                 f"|FL| <= {fc.max_fl}, oracle <= {bounds.max_states} states", timing=timing)
    if fc.cases <= 0 or fc.max_fl <= 0:
        return rep
    atoms = ("p", "q") if fc.logic == "graded" else ("q", "r")
    gen = FormulaGenerator(sig, defs, Shape(depth=fc.depth, atoms=atoms, max_fl=fc.max_fl), fc.seed)

    def check(f: Formula, name: str) -> QueryResult:
        r = _solve(Query(name, f), sig, config, solver)
        _compare(r, sig, bounds)
        return r

    for i in range(fc.cases):
        try:
            f = gen.bounded()
        except RuntimeError:
            break
        r = check(f, f"f{i}")
        rep.results.append(r)
        if r.failed:
            small = shrink(f, lambda g: check(g, "shrink").failed)
            rc = check(small, "counterexample")
            text = counterexample_file(small, sig, defs, rc)
            rep.counterexamples.append((f"f{i}", text))
            rep.extra.append(f"# counterexample for f{i} (|FL| = {len(fischer_ladner(small))})")
            rep.extra.append(text.rstrip("\n"))
    return rep
