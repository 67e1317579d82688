"""Monotone one-step rules and the demands they impose on tableau atoms.

A rule ``premise / conclusion`` matches an atom when the dual of every
conclusion literal occurs in the atom.  The matched instance's demand is the
negated, substituted premise, an obligation some successor has to meet.
Demands are kept as monotone DNFs over opaque formulas (clauses are
frozensets read conjunctively).
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .formula import (BOT, TOP, Formula, Modality, Signature, conj_all, disj_all, modal,
                      negate, sort_key, strip, to_text, var)


def _key(fs: Iterable[Formula]) -> tuple:
    return tuple(sorted((sort_key(f) for f in fs)))


def sorted_formulas(fs: Iterable[Formula]) -> list:
    return sorted(fs, key=sort_key)


@dataclass(frozen=True)
class OneStepRule:
    """A rule instance shape: premise over variables, conclusion literals.

    ``family`` is ``"K"`` or ``"G"``; graded rules also record the
    coefficient vectors ``r``, ``s`` and the grades ``k``, ``l``.
    """

    family: str
    premise: Formula
    conclusion: tuple
    agent: object = ""
    r: tuple = ()
    s: tuple = ()
    k: tuple = ()
    l: tuple = ()

    @property
    def rule_id(self) -> str:
        if self.family == "K":
            tag = f"K_{self.agent}" if self.agent != "" else "K"
            return f"{tag}[n={len(self.conclusion) - 1}]"
        nums = lambda t: ",".join(map(str, t))
        return f"G[r={nums(self.r)};k={nums(self.k)}|s={nums(self.s)};l={nums(self.l)}]"

    def variables(self) -> list:
        out: list = []
        for lit in self.conclusion:
            out.append(lit.arg.name)
        return out

    def side_condition(self) -> bool:
        if self.family != "G":
            return True
        lhs = sum(ri * (ki + 1) for ri, ki in zip(self.r, self.k))
        rhs = 1 + sum(sj * lj for sj, lj in zip(self.s, self.l))
        return (len(self.r) + len(self.s) >= 1 and all(x > 0 for x in self.r + self.s)
                and lhs >= rhs)


@dataclass(frozen=True)
class Demand:
    """Obligation ``formula`` for some successor, with its provenance."""

    clauses: tuple  # DNF: tuple of frozensets of formulas, canonical order
    rule_id: str = ""
    sigma: tuple = ()  # ((variable, formula), ...)
    agent: object = None  # relational demands: whose successor must meet it

    @property
    def formula(self) -> Formula:
        return disj_all(conj_all(sorted_formulas(c)) for c in self.clauses)

    @property
    def key(self) -> tuple:
        return tuple(_key(c) for c in self.clauses)

    @property
    def is_bot(self) -> bool:
        return not self.clauses

    def dump(self) -> str:
        sig = ", ".join(f"{v}:={to_text(f)}" for v, f in self.sigma)
        return f"{self.rule_id} sigma({sig}) |- {to_text(self.formula)}"


@dataclass(frozen=True)
class RuleInstance:
    rule: OneStepRule
    sigma: tuple  # ((variable, formula), ...)

    def substituted_conclusion(self) -> list:
        env = dict(self.sigma)
        return [modal(lit.mod, env[lit.arg.name]) for lit in self.rule.conclusion]


@dataclass(frozen=True)
class CoefficientBounds:
    """Graded instance search: coefficients range over ``0..limit``.

    ``limit=None`` selects (1 + max grade) * (number of literals).  At most
    ``max_vectors`` coefficient vectors are tried; the limit is lowered (and
    the result flagged as truncated) when the full box would be larger.
    """

    limit: Optional[int] = None
    max_vectors: int = 1 << 18


def contract(literals: Iterable[Formula]) -> list:
    """Drop repeated literals, canonical order."""
    return sorted_formulas(set(literals))


def _opaque(f: Formula, out: list) -> None:
    if f.op in ("and", "or"):
        _opaque(f.left, out)
        _opaque(f.right, out)
    elif f.op not in ("top", "bot") and f not in out:
        out.append(f)


def _pl_value(f: Formula, env: dict) -> bool:
    if f.op == "and":
        return _pl_value(f.left, env) and _pl_value(f.right, env)
    if f.op == "or":
        return _pl_value(f.left, env) or _pl_value(f.right, env)
    if f.op == "top":
        return True
    if f.op == "bot":
        return False
    return env[f]


def prop_entails(phis: Iterable[Formula], psi: Formula, max_atoms: int = 22) -> bool:
    """Truth-table check that the conjunction of ``phis`` entails ``psi``.

    Modal and fixed point formulas (and literals) are opaque atoms compared
    by identity.
    """
    phis = list(phis)
    atoms: list = []
    for f in phis + [psi]:
        _opaque(f, atoms)
    if len(atoms) > max_atoms:
        raise ValueError(f"too many propositional atoms ({len(atoms)}) for a truth table")
    for values in itertools.product((False, True), repeat=len(atoms)):
        env = dict(zip(atoms, values))
        if all(_pl_value(f, env) for f in phis) and not _pl_value(psi, env):
            return False
    return True


def normalize_dnf(clauses: Iterable[Iterable[Formula]]) -> tuple:
    """Drop contradictory and absorbed clauses; canonical order."""
    cleaned = []
    for c in clauses:
        c = frozenset(f for f in c if f is not TOP)
        if BOT in c or _contradictory(c):
            continue
        cleaned.append(c)
    cleaned = list(set(cleaned))
    minimal = [c for c in cleaned if not any(d < c for d in cleaned)]
    return tuple(sorted(minimal, key=_key))


def _contradictory(c: frozenset) -> bool:
    stripped = {strip(f) for f in c}
    return any(negate(f) in stripped for f in stripped)


def _sigma_value(f: Formula) -> Formula:
    """Substitution entry for a matched literal argument (time-outs erased)."""
    return negate(strip(f))


# ---------------------------------------------------------------------------
# K and K_n

def k_rule(n: int, agent: object = "") -> OneStepRule:
    """``a1 \\/ .. \\/ an \\/ b / <>a1 \\/ .. \\/ <>an \\/ []b``."""
    from .formula import box, diamond
    avars = [var(f"a{i}") for i in range(1, n + 1)]
    b = var("b")
    premise = disj_all(avars + [b])
    conclusion = tuple([modal(diamond(agent), a) for a in avars] + [modal(box(agent), b)])
    return OneStepRule("K", premise, conclusion, agent=agent)


def k_rule_instances(boxes: list, diamond: Optional[Formula]) -> Optional[RuleInstance]:
    """The K instance whose dualized conclusion is exactly ``boxes + [diamond]``."""
    if diamond is None:
        return None
    agent = diamond.mod.index
    boxes = contract(boxes)
    rule = k_rule(len(boxes), agent)
    sigma = [(f"a{i}", _sigma_value(bx.arg)) for i, bx in enumerate(boxes, 1)]
    sigma.append(("b", _sigma_value(diamond.arg)))
    return RuleInstance(rule, tuple(sigma))


def k_instance_demand(inst: RuleInstance) -> Demand:
    env = dict(inst.sigma)
    clause = frozenset(negate(env[v]) for v in env)
    return Demand(normalize_dnf([clause]), inst.rule.rule_id, inst.sigma, inst.rule.agent)


def _k_demand(boxes: list, d: Formula) -> Demand:
    inst = k_rule_instances(boxes, d)
    clause = frozenset([b.arg for b in boxes] + [d.arg])
    return Demand(normalize_dnf([clause]), inst.rule.rule_id, inst.sigma, inst.rule.agent)


def k_demands(literals: Iterable[Formula]) -> list:
    """One maximal demand ``c1 /\\ .. /\\ cn /\\ d`` per diamond, per agent."""
    lits = contract(literals)
    agents = sorted({lit.mod.index for lit in lits if lit.op == "mod"}, key=str)
    out = []
    for a in agents:
        boxes = [f for f in lits if f.op == "mod" and f.mod.index == a and f.mod.box]
        diamonds = [f for f in lits if f.op == "mod" and f.mod.index == a and not f.mod.box]
        for d in diamonds:
            out.append(_k_demand(boxes, d))
    return _dedupe(out)


def _dedupe(demands: list) -> list:
    seen: dict = {}
    for d in demands:
        seen.setdefault((str(d.agent), d.key), d)
    return [seen[k] for k in sorted(seen)]


# ---------------------------------------------------------------------------
# graded

def graded_rule(r, k, s, l) -> OneStepRule:
    """Rule with premise sum -r_i [~a_i] + sum s_j [b_j] >= 0 (as a DNF) and
    conclusion [k_i] a_i \\/ <l_j> b_j."""
    from .formula import gbox, gdiamond
    n, m = len(r), len(s)
    avars = [var(f"a{i}") for i in range(1, n + 1)]
    bvars = [var(f"b{j}") for j in range(1, m + 1)]
    weights = np.array(list(r) + list(s), dtype=np.int64)
    table = _assignments(n + m)
    # premise value: sum over true a_i of r_i, plus true b_j of s_j, minus sum r
    vals = table @ weights - int(sum(r))
    clauses = _minimal_true_sets(table, vals >= 0)
    premise = disj_all(conj_all([(avars + bvars)[i] for i in c]) for c in clauses)
    conclusion = tuple([modal(gbox(ki), a) for ki, a in zip(k, avars)]
                       + [modal(gdiamond(lj), b) for lj, b in zip(l, bvars)])
    return OneStepRule("G", premise, conclusion, r=tuple(r), s=tuple(s), k=tuple(k), l=tuple(l))


_ASSIGN_CACHE: dict = {}


def _assignments(n: int) -> np.ndarray:
    """All 0/1 rows of length n, row index = bitmask."""
    a = _ASSIGN_CACHE.get(n)
    if a is None:
        idx = np.arange(1 << n, dtype=np.int64)
        a = ((idx[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int64)
        _ASSIGN_CACHE[n] = a
    return a


def _minimal_true_sets(table: np.ndarray, truth: np.ndarray) -> list:
    """Minimal true rows of a monotone truth table as index tuples."""
    n = table.shape[1]
    masks = [m for m in range(len(truth)) if truth[m]]
    masks.sort(key=lambda m: (bin(m).count("1"), m))
    minimal: list = []
    for m in masks:
        if not any((mm & m) == mm for mm in minimal):
            minimal.append(m)
    return [tuple(i for i in range(n) if m >> i & 1) for m in minimal]


def graded_rule_instances(literals: Iterable[Formula],
                          bounds: CoefficientBounds = CoefficientBounds()) -> tuple:
    """Graded instances matching the atom's literals, up to the coefficient bound.

    Returns ``(instances, truncated)``.  Instances are deduplicated by the
    demand they produce (coefficient vectors with a common factor produce
    the same demand as the reduced vector and are skipped).
    """
    return _graded(literals, bounds, want_rules=True)


def graded_demands(literals: Iterable[Formula],
                   bounds: CoefficientBounds = CoefficientBounds()) -> tuple:
    """``(demands, truncated)`` for the graded literals of an atom."""
    return _graded(literals, bounds, want_rules=False)


def _graded(literals, bounds: CoefficientBounds, want_rules: bool) -> tuple:
    lits = contract(f for f in literals if f.op == "mod" and f.mod.graded)
    dias = [f for f in lits if not f.mod.box]
    boxes = [f for f in lits if f.mod.box]
    if not dias:
        return [], False
    n, m = len(dias), len(boxes)
    L = n + m
    kk = np.array([f.mod.index for f in dias], dtype=np.int64)
    ll = np.array([f.mod.index for f in boxes], dtype=np.int64)
    limit = bounds.limit
    if limit is None:
        limit = (1 + int(max(f.mod.index for f in lits))) * L
    truncated = False
    while limit > 1 and (limit + 1) ** L > bounds.max_vectors:
        limit -= 1
        truncated = True
    if (limit + 1) ** L > bounds.max_vectors:
        limit, truncated = 1, True
    grid = np.array(list(itertools.product(range(limit + 1), repeat=L)), dtype=np.int64)
    if len(grid) == 0:
        return [], truncated
    r, s = grid[:, :n], grid[:, n:]
    ok = r.sum(axis=1) > 0
    ok &= (r * (kk + 1)).sum(axis=1) >= 1 + (s * ll).sum(axis=1)
    ok &= np.gcd.reduce(grid, axis=1) == 1
    grid = grid[ok]
    if len(grid) == 0:
        return [], truncated
    # demand value: sum of r_i over true diamond-args minus s_j over false box-args
    table = _assignments(L)
    sign = np.concatenate([np.ones(n, dtype=np.int64), np.zeros(m, dtype=np.int64)])
    pos = table * sign  # diamond args true
    neg = (1 - table) * (1 - sign)  # box args false
    vals = pos @ grid.T - neg @ grid.T  # (2^L, V)
    truth = (vals >= 1).T  # (V, 2^L)
    packed = np.packbits(truth, axis=1)
    _, first = np.unique(packed, axis=0, return_index=True)
    args = [f.arg for f in dias] + [f.arg for f in boxes]
    out = []
    for idx in sorted(first):
        vec = grid[idx]
        clauses = [frozenset(args[i] for i in c) for c in _minimal_true_sets(table, truth[idx])]
        sigma = tuple((f"a{i + 1}", _sigma_value(args[i])) for i in range(n) if vec[i] > 0) + \
            tuple((f"b{j + 1}", _sigma_value(args[n + j])) for j in range(m) if vec[n + j] > 0)
        rule = graded_rule([int(vec[i]) for i in range(n) if vec[i] > 0],
                           [int(kk[i]) for i in range(n) if vec[i] > 0],
                           [int(vec[n + j]) for j in range(m) if vec[n + j] > 0],
                           [int(ll[j]) for j in range(m) if vec[n + j] > 0])
        demand = Demand(normalize_dnf(clauses), rule.rule_id, sigma)
        out.append((RuleInstance(rule, sigma), demand) if want_rules else demand)
    if want_rules:
        return out, truncated
    return _dedupe(out), truncated


# ---------------------------------------------------------------------------
# dispatch

@dataclass
class RuleSet:
    """Demand generator for one signature kind; ``graded`` flags schema search."""

    name: str
    demands: Callable
    graded: bool = False


_RULE_SETS = {
    "k": RuleSet("K", lambda lits, bounds: (k_demands(lits), False)),
    "kn": RuleSet("K_n", lambda lits, bounds: (k_demands(lits), False)),
    "graded": RuleSet("graded", graded_demands, graded=True),
}


def register_rule_set(kind: str, rules: RuleSet) -> None:
    _RULE_SETS[kind] = rules


class DemandCache:
    """Memoized ``all_demands`` keyed by the canonical literal set."""

    def __init__(self, sig: Signature, bounds: CoefficientBounds = CoefficientBounds()):
        self.sig = sig
        self.bounds = bounds
        self.table: dict = {}
        self.truncated = False
        self.hits = 0
        self._lock = threading.Lock()

    def __call__(self, literals: frozenset) -> list:
        got = self.table.get(literals)
        if got is not None:
            self.hits += 1
            return got
        ds, trunc = all_demands(literals, self.sig, self.bounds)
        with self._lock:
            self.table[literals] = ds
            self.truncated |= trunc
        return ds


def all_demands(literals: Iterable[Formula], sig: Signature,
                bounds: CoefficientBounds = CoefficientBounds()) -> tuple:
    """``(demands, truncated)`` for the modal literals of an atom."""
    lits = [f for f in literals if f.op == "mod"]
    if not lits:
        return [], False
    rs = _RULE_SETS.get(sig.kind)
    if rs is None:
        raise ValueError(f"no rule set registered for logic {sig.kind!r}")
    return rs.demands(lits, bounds)


def dump_demands(demands: Iterable[Demand]) -> str:
    return "\n".join(d.dump() for d in demands)


def modal_literals(formulas: Iterable[Formula]) -> frozenset:
    return frozenset(f for f in formulas if f.op == "mod")


__all__ = [
    "OneStepRule", "RuleInstance", "Demand", "CoefficientBounds", "contract",
    "prop_entails", "k_rule", "k_rule_instances", "k_demands", "graded_rule",
    "graded_rule_instances", "graded_demands", "all_demands", "DemandCache",
    "dump_demands", "modal_literals", "normalize_dnf", "register_rule_set", "RuleSet",
]
