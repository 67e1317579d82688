"""Finite models from surviving tableau atoms, and their verification."""
from __future__ import annotations

from collections import deque
from typing import Iterable, Optional

import numpy as np

from .formula import Formula, Signature, strip
from .semantics import ConcreteModel, _Evaluator, lift_graded, lift_relational
from .tableau import TableauGraph, atom_text
from .timed import timed_leq


class ExtractionError(RuntimeError):
    pass


def extract_model(t: TableauGraph, alive: set, root: int) -> ConcreteModel:
    """States are the live atoms reachable from ``root`` through the chosen
    demand witnesses.  ``labels[s]`` holds the tableau atom id of state s."""
    if t.sig.kind == "graded":
        return _extract_graded(t, alive, root)
    return _extract_kripke(t, alive, root)


def _witness(t: TableauGraph, i: int, k: int, alive: set) -> int:
    for j in t.successors(i, k):
        if j in alive:
            return j
    raise ExtractionError(f"demand {k} of atom {i} has no live successor")


def _extract_kripke(t: TableauGraph, alive: set, root: int) -> ConcreteModel:
    agents = tuple(t.sig.agents)
    order = {root: 0}
    labels = [root]
    edges = []
    queue = deque([root])
    while queue:
        i = queue.popleft()
        for k, (d, _) in enumerate(t.edges[i]):
            j = _witness(t, i, k, alive)
            if j not in order:
                order[j] = len(labels)
                labels.append(j)
                queue.append(j)
            edges.append((d.agent, order[i], order[j]))
    val: dict = {}
    for s, i in enumerate(labels):
        for f in t.atoms[i]:
            if f.op == "prop":
                val.setdefault(f.name, set()).add(s)
    m = ConcreteModel.kripke(len(labels), edges, val, agents)
    m.labels = labels
    return m


def _extract_graded(t: TableauGraph, alive: set, root: int) -> ConcreteModel:
    order = {root: 0}
    labels = [root]
    triples = []
    queue = deque([root])
    while queue:
        i = queue.popleft()
        pool = sorted({j for k in range(len(t.edges[i])) for j in t.successors(i, k) if j in alive})
        mult = _multiplicities(t, i, pool)
        for j, x in zip(pool, mult):
            if x == 0:
                continue
            if j not in order:
                order[j] = len(labels)
                labels.append(j)
                queue.append(j)
            triples.append((order[i], order[j], x))
    val: dict = {}
    for s, i in enumerate(labels):
        for f in t.atoms[i]:
            if f.op == "prop":
                val.setdefault(f.name, set()).add(s)
    m = ConcreteModel.multigraph(len(labels), triples, val)
    m.labels = labels
    return m


def _multiplicities(t: TableauGraph, i: int, pool: list) -> list:
    """Smallest multiplicities on ``pool`` meeting the graded literals of atom i."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    lits = sorted((f for f in t.atoms[i] if f.op == "mod"), key=lambda f: f.uid)
    if not lits:
        return [0] * len(pool)
    rows, lo, hi = [], [], []
    for f in lits:
        inside = [1.0 if t.contains(j, f.arg) else 0.0 for j in pool]
        k = f.mod.index
        if f.mod.box:
            rows.append([1.0 - x for x in inside])
            lo.append(-np.inf)
            hi.append(k)
        else:
            rows.append(inside)
            lo.append(k + 1)
            hi.append(np.inf)
    if not pool:
        if any(lb > 0 for lb in lo):
            raise ExtractionError(f"atom {i} needs successors but has none")
        return []
    cap = 1 + max(f.mod.index for f in lits)
    res = milp(c=np.ones(len(pool)), integrality=np.ones(len(pool)),
               bounds=Bounds(0, cap),
               constraints=LinearConstraint(np.array(rows), lo, hi))
    if not res.success:
        raise ExtractionError(f"no multiplicities satisfy the graded literals of "
                              f"{atom_text(t.atoms[i])}")
    return [int(round(x)) for x in res.x]


def verify_model(model: ConcreteModel, t: TableauGraph, phi: Formula) -> Optional[str]:
    """None if ``phi`` holds at the root and every state satisfies its atom."""
    ev = _Evaluator(model)
    if not ev.run(phi, {}) >> model.root & 1:
        return "formula false at the root"
    for s, i in enumerate(model.labels or ()):
        for f in t.atoms[i]:
            if not ev.run(f, {}) >> s & 1:
                return f"state {s} violates member {f}"
    return None


def check_coherent(model: ConcreteModel, t: TableauGraph,
                   sigma: Optional[Iterable[Formula]] = None, strict: bool = False) -> bool:
    """Modal members are realized by the transition structure.

    For every state n and modal formula <>psi (from the atom, or from
    ``sigma``), if <>psi is in the label of n then the lifting holds of the
    successors labelled with psi.  ``strict`` also requires the converse.
    """
    labels = model.labels or []
    mods = set()
    for i in labels:
        mods |= {f for f in t.atoms[i] if f.op == "mod"}
    if sigma is not None:
        mods |= {f for f in sigma if f.op == "mod"}
    for s, i in enumerate(labels):
        for f in mods:
            A = 0
            for u, j in enumerate(labels):
                if t.contains(j, f.arg):
                    A |= 1 << u
            if model.kind == "kripke":
                lifted = lift_relational(A, model.succ[f.mod.index][s], f.mod.box)
            else:
                lifted = lift_graded(A, model.mult[s], f.mod.index, f.mod.box)
            member = t.contains(i, f)
            if member and not lifted:
                return False
            if strict and lifted and not member:
                return False
    return True
