"""Small-model satisfiability oracle, independent of the tableau.

Two engines search models state count by state count: plain enumeration
(tiny bounds) and a SAT encoding of the model-checking clauses with fixed
points unrolled once per state, which is exact on models of that size.
Models found by the SAT engine are re-checked with :func:`evaluate`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .formula import Formula, Signature, X, P, atoms_of
from .semantics import (BatchModels, ConcreteModel, count_models, enumerate_models, evaluate,
                        model_kind)


@dataclass(frozen=True)
class OracleBounds:
    max_states: int = 4
    max_multiplicity: int = 3
    engine: str = "auto"  # auto | enumerate | sat
    enumerate_limit: int = 20_000  # models per size handled by enumeration under auto


def brute_force_sat(phi: Formula, sig: Signature, bounds: OracleBounds = OracleBounds()):
    """First (model, state) with ``phi`` true at ``state``, or None."""
    atoms = sorted(atoms_of(phi))
    kind = model_kind(sig)
    agents = tuple(sig.agents) if kind == "kripke" else ()
    for n in range(1, bounds.max_states + 1):
        engine = bounds.engine
        if engine == "auto":
            size = count_models(kind, n, atoms, bounds.max_multiplicity, agents)
            engine = "enumerate" if size <= bounds.enumerate_limit else "sat"
        if engine == "enumerate":
            hit = _enumerate(phi, kind, n, atoms, bounds.max_multiplicity, agents)
        else:
            hit = sat_search(phi, kind, n, atoms, bounds.max_multiplicity, agents)
        if hit is not None:
            return hit
    return None


_BATCH_LIMIT = 1 << 22  # models per vectorized Kripke sweep


def _enumerate(phi, kind, n, atoms, cap, agents):
    if kind == "kripke" and count_models(kind, n, atoms, cap, agents) <= _BATCH_LIMIT:
        batch = BatchModels.all_kripke(n, atoms, agents)
        hits = np.flatnonzero(batch.evaluate(phi))
        if not len(hits):
            return None
        m = batch.model(int(hits[0]))
        mask = evaluate(m, phi)
        s = (mask & -mask).bit_length() - 1
        m.root = s
        return m, s
    for m in enumerate_models(kind, n, atoms, cap, agents, limit=10 ** 9, min_states=n):
        mask = evaluate(m, phi)
        if mask:
            s = (mask & -mask).bit_length() - 1
            m.root = s
            return m, s
    return None


class _Encoder:
    def __init__(self, kind: str, n: int, atoms, cap: int, agents):
        from pysat.formula import IDPool
        self.kind, self.n, self.cap, self.agents = kind, n, cap, agents
        self.pool = IDPool()
        self.clauses: list = []
        self.T = self.pool.id("true")
        self.clauses.append([self.T])
        self.val = {p: [self.pool.id(("v", p, s)) for s in range(n)] for p in atoms}
        if kind == "kripke":
            self.rel = {a: [[self.pool.id(("r", a, s, t)) for t in range(n)] for s in range(n)]
                        for a in agents}
        else:
            # order encoding: m[s][t][c-1] true iff multiplicity(s,t) >= c
            self.mult = [[[self.pool.id(("m", s, t, c)) for c in range(1, cap + 1)]
                          for t in range(n)] for s in range(n)]
            for s, t in itertools.product(range(n), range(n)):
                ms = self.mult[s][t]
                for c in range(1, cap):
                    self.clauses.append([-ms[c], ms[c - 1]])
        self.memo: dict = {}

    def fresh(self) -> int:
        return self.pool.id(("aux", len(self.pool.obj2id)))

    def enc(self, f: Formula, env: Optional[tuple] = None) -> list:
        """Per-state literals, each implying that f holds there."""
        key = (f, env)
        got = self.memo.get(key)
        if got is not None:
            return got
        r = self._enc(f, env)
        self.memo[key] = r
        return r

    def _enc(self, f: Formula, env) -> list:
        op, n, T = f.op, self.n, self.T
        if op == "top":
            return [T] * n
        if op == "bot":
            return [-T] * n
        if op == "prop":
            return self.val.get(f.name, [-T] * n)
        if op == "nprop":
            v = self.val.get(f.name)
            return [T] * n if v is None else [-x for x in v]
        if op == "var":
            return dict(env)[f.name]
        if op == "nvar":
            raise ValueError("negated variables do not occur in monotone bodies")
        if op in ("and", "or"):
            a, b = self.enc(f.left, env), self.enc(f.right, env)
            out = []
            for s in range(n):
                y = self.fresh()
                if op == "and":
                    self.clauses += [[-y, a[s]], [-y, b[s]]]
                else:
                    self.clauses.append([-y, a[s], b[s]])
                out.append(y)
            return out
        if op == "mod":
            return self._modal(f, self.enc(f.arg, env))
        # fixed points: n unrollings reach the fixed point on n states
        arg = self.enc(f.arg, env)
        body = f.fdef.body if op == "mu" else f.fdef.dual_body
        cur = [-T] * n if op == "mu" else [T] * n
        rounds = n if f.timeout is None else f.timeout
        for _ in range(rounds):
            cur = self.enc(body, ((X, tuple(cur)), (P, tuple(arg))))
        return list(cur)

    def _modal(self, f: Formula, A: list) -> list:
        n, mod, out = self.n, f.mod, []
        for s in range(n):
            y = self.fresh()
            out.append(y)
            if mod.kind == "rel":
                R = self.rel[mod.index][s]
                if mod.box:
                    for t in range(n):
                        self.clauses.append([-y, -R[t], A[t]])
                else:
                    zs = []
                    for t in range(n):
                        z = self.fresh()
                        self.clauses += [[-z, R[t]], [-z, A[t]]]
                        zs.append(z)
                    self.clauses.append([-y] + zs)
                continue
            k = mod.index
            units = []
            for t in range(n):
                for c in range(self.cap):
                    u = self.fresh()
                    m = self.mult[s][t][c]
                    if mod.box:
                        self.clauses.append([-m, A[t], u])  # mass outside A
                    else:
                        self.clauses += [[-u, m], [-u, A[t]]]  # mass inside A
                    units.append(u)
            if mod.box:
                for sub in itertools.combinations(units, k + 1):
                    self.clauses.append([-y] + [-u for u in sub])
            else:
                if len(units) < k + 1:
                    self.clauses.append([-y])
                    continue
                for sub in itertools.combinations(units, len(units) - k):
                    self.clauses.append([-y] + list(sub))
        return out

    def decode(self, model: set) -> ConcreteModel:
        n = self.n
        val = {p: {s for s in range(n) if vs[s] in model} for p, vs in self.val.items()}
        if self.kind == "kripke":
            edges = [(a, s, t) for a in self.agents for s in range(n) for t in range(n)
                     if self.rel[a][s][t] in model]
            return ConcreteModel.kripke(n, edges, val, self.agents)
        triples = []
        for s, t in itertools.product(range(n), range(n)):
            m = sum(1 for v in self.mult[s][t] if v in model)
            if m:
                triples.append((s, t, m))
        return ConcreteModel.multigraph(n, triples, val)


def sat_search(phi: Formula, kind: str, n: int, atoms, cap: int = 3, agents=("",)):
    """A model with exactly ``n`` states satisfying ``phi`` at state 0, or None.

    Restricting to state 0 loses nothing: states are interchangeable.
    """
    from pysat.solvers import Solver

    enc = _Encoder(kind, n, atoms, cap, agents)
    root = enc.enc(phi)[0]
    with Solver(name="cadical153", bootstrap_with=enc.clauses) as solver:
        if not solver.solve(assumptions=[root]):
            return None
        model = {v for v in solver.get_model() if v > 0}
    m = enc.decode(model)
    if not evaluate(m, phi) & 1:
        raise AssertionError(f"SAT encoding produced a non-model for {phi}")
    return m, 0
