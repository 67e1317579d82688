"""Timed-out tableaux with global caching.

Nodes are atoms: saturated, clash-free sets of timed formulas, interned so
every distinct atom is expanded once.  Each demand of an atom points to the
atoms obtained by saturating its clauses; a greatest fixed point removes
atoms with an unserved demand.  Eventualities are handled by the time-outs
alone: a least fixed point member gets a finite budget and dies when the
budget runs out before it is fulfilled.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .formula import BOT, TOP, Formula, Signature, fischer_ladner, mu, negate, sort_key, strip, to_text
from .rules import CoefficientBounds, DemandCache
from .timed import is_timed_formula, tau, timed_leq, unfold

CLASH = object()


class NodeCapExceeded(RuntimeError):
    pass


def atom_key(atom: frozenset) -> tuple:
    return tuple(sorted(sort_key(f) for f in atom))


def atom_text(atom: frozenset) -> str:
    return "{" + ", ".join(to_text(f) for f in sorted(atom, key=sort_key)) + "}"


@dataclass
class Stats:
    atoms: int = 0
    expanded: int = 0
    pruned: int = 0
    saturations: int = 0
    saturation_hits: int = 0
    timeout_clashes: int = 0
    stability_violations: int = 0
    max_timeout: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class TableauGraph:
    """One tableau run.

    ``budget`` is the time-out given to least fixed point members that have
    none yet (timed mode).  With ``budget=None`` the graph is built over
    untimed atoms in which every disjunct of a disjunction is decided (it or
    its negation is a member); that variant backs the elimination check.
    """

    def __init__(self, sig: Signature, budget: Optional[int], demands: DemandCache,
                 node_cap: int = 200_000, record: Optional[set] = None):
        self.sig = sig
        self.budget = budget
        self.timed = budget is not None
        self.demand_cache = demands
        self.node_cap = node_cap
        self.record = record
        self.atoms: list = []
        self.index: dict = {}
        self.by_t: list = []  # per atom: t-image -> member
        self.edges: list = []  # per atom: list of (Demand, [[succ ids] per clause]) or None
        self.roots: list = []
        self.stats = Stats()
        self._sat_memo: dict = {}
        self._valid: dict = {}

    # ----------------------------------------------------------------- atoms
    def intern(self, atom: frozenset) -> int:
        i = self.index.get(atom)
        if i is not None:
            return i
        if len(self.atoms) >= self.node_cap:
            raise NodeCapExceeded(f"node cap {self.node_cap} reached")
        i = len(self.atoms)
        self.index[atom] = i
        self.atoms.append(atom)
        self.by_t.append({strip(f): f for f in atom})
        self.edges.append(None)
        self.stats.atoms += 1
        return i

    def contains(self, i: int, f: Formula) -> bool:
        """f in the closure of atom i under increasing time-outs."""
        g = self.by_t[i].get(strip(f))
        return g is not None and timed_leq(g, f)

    # ------------------------------------------------------------ saturation
    def saturate(self, seed) -> list:
        """All saturated clash-free extensions of ``seed``, canonical order."""
        key = frozenset(seed)
        hit = self._sat_memo.get(key)
        if hit is not None:
            self.stats.saturation_hits += 1
            return hit
        self.stats.saturations += 1
        out: dict = {}
        self._sat({}, sorted(key, key=sort_key, reverse=True), [], out)
        res = sorted(out.values(), key=atom_key)
        self._sat_memo[key] = res
        return res

    def _sat(self, members: dict, todo: list, ors: list, out: dict) -> None:
        while True:
            while todo:
                if self._add(members, todo.pop(), todo, ors) is CLASH:
                    return
            if not ors:
                break
            f = ors.pop()
            if members.get(strip(f)) is not f:
                continue  # superseded by a stronger copy, which was queued itself
            options = self._options(members, f)
            if options is None:
                continue
            for opt in options:
                self._sat(dict(members), list(opt), list(ors), out)
            return
        atom = frozenset(members.values())
        out[atom] = atom

    def _options(self, members: dict, f: Formula):
        a, b = f.left, f.right
        if self.timed:
            for d in (a, b):
                g = members.get(strip(d))
                if g is not None and timed_leq(g, d):
                    return None
            return [[a], [b]]
        # decide both disjuncts
        has = lambda d: strip(d) in members
        if has(a) and has(b):
            return None
        na, nb = negate(a), negate(b)
        opts = [[a, b], [a, nb], [na, b]]
        return [o for o in opts if not any(strip(negate(x)) in members for x in o)]

    def _add(self, members: dict, f: Formula, todo: list, ors: list):
        op = f.op
        if op == "top":
            return None
        if op == "bot":
            return CLASH
        if op == "mu" and f.timeout is None and self.timed:
            f = mu(f.fdef, f.arg, self.budget)
            op = "mu"
        t = strip(f)
        g = members.get(t)
        if g is not None and timed_leq(g, f):
            return None
        if negate(t) in members:
            return CLASH
        if op == "mu" and f.timeout == 0:
            self.stats.timeout_clashes += 1
            return CLASH
        members[t] = f
        if self.record is not None:
            self.record.add(f)
        if self.timed:
            self._check_valid(f)
        if op == "and":
            todo.append(f.right)
            todo.append(f.left)
        elif op == "or":
            ors.append(f)
        elif op == "mu":
            if f.timeout is not None:
                self.stats.max_timeout = max(self.stats.max_timeout, f.timeout)
            u = unfold(f)
            if self.timed:
                self._check_valid(u)
            todo.append(u)
        elif op == "nu":
            todo.append(unfold(f))
        return None

    def _check_valid(self, f: Formula) -> None:
        ok = self._valid.get(f)
        if ok is None:
            ok = is_timed_formula(f)
            self._valid[f] = ok
            if not ok:
                self.stats.stability_violations += 1

    # ------------------------------------------------------------- expansion
    def build(self, phi: Formula) -> None:
        queue = deque()
        for atom in self.saturate([phi]):
            i = self.intern(atom)
            self.roots.append(i)
            queue.append(i)
        while queue:
            i = queue.popleft()
            if self.edges[i] is not None:
                continue
            lits = frozenset(f for f in self.atoms[i] if f.op == "mod")
            expansion = []
            for d in self.demand_cache(lits):
                per_clause = []
                for clause in d.clauses:
                    ids = []
                    for atom in self.saturate(clause):
                        j = self.intern(atom)
                        ids.append(j)
                        if self.edges[j] is None:
                            queue.append(j)
                    per_clause.append(ids)
                expansion.append((d, per_clause))
            self.edges[i] = expansion
            self.stats.expanded += 1

    def successors(self, i: int, k: int) -> list:
        """Distinct successor candidates of demand ``k`` of atom ``i``, in order."""
        seen, out = set(), []
        for ids in self.edges[i][k][1]:
            for j in ids:
                if j not in seen:
                    seen.add(j)
                    out.append(j)
        return out

    # --------------------------------------------------------------- pruning
    def prune(self, alive: Optional[set] = None) -> set:
        """Greatest set of atoms all of whose demands have a live successor."""
        n = len(self.atoms)
        alive = set(range(n)) if alive is None else set(alive)
        count: dict = {}
        preds: dict = {}
        dead = deque()
        for i in sorted(alive):
            if self.edges[i] is None:
                raise RuntimeError("pruning an unexpanded tableau")
            for k in range(len(self.edges[i])):
                succ = [j for j in self.successors(i, k) if j in alive]
                count[(i, k)] = len(succ)
                for j in succ:
                    preds.setdefault(j, []).append((i, k))
                if not succ:
                    dead.append(i)
        while dead:
            i = dead.popleft()
            if i not in alive:
                continue
            alive.discard(i)
            self.stats.pruned += 1
            for (p, k) in preds.get(i, ()):
                count[(p, k)] -= 1
                if count[(p, k)] == 0 and p in alive:
                    dead.append(p)
        return alive

    # ------------------------------------------------- eventuality elimination
    def eliminate(self) -> set:
        """Untimed graphs: drop atoms with unserved demands or unfulfilled
        least fixed points, to a fixed point."""
        alive = self.prune()
        events = sorted({f for i in alive for f in self.atoms[i] if f.op == "mu"}, key=sort_key)
        while True:
            before = len(alive)
            for e in events:
                good = self._fulfilling(e, alive)
                bad = {i for i in alive if e in self.atoms[i] and i not in good}
                if bad:
                    self.stats.pruned += len(bad)
                    alive -= bad
                    alive = self.prune(alive)
            if len(alive) == before:
                return alive

    def _fulfilling(self, e: Formula, alive: set) -> set:
        body = unfold(e)
        holders = [i for i in sorted(alive) if e in self.atoms[i]]
        good: set = set()
        memo: dict = {}
        changed = True
        while changed:
            changed = False
            memo.clear()
            for i in holders:
                if i not in good and self._ful(i, body, e, good, alive, memo):
                    good.add(i)
                    changed = True
        return good

    def _ful(self, i: int, f: Formula, e: Formula, good: set, alive: set, memo: dict) -> bool:
        if f is e:
            return i in good and e in self.atoms[i]
        if not _mentions(f, e):
            return f in self.atoms[i] or (f.op in ("and", "or") and self._ful_bool(i, f, e, good, alive, memo))
        key = (i, f)
        if key in memo:
            return memo[key]
        if f.op in ("and", "or"):
            r = self._ful_bool(i, f, e, good, alive, memo)
        elif f.op == "mod":
            r = f in self.atoms[i] and self._ful_modal(i, f.arg, e, good, alive, memo)
        else:
            r = f in self.atoms[i]
        memo[key] = r
        return r

    def _ful_bool(self, i, f, e, good, alive, memo) -> bool:
        if f.op == "and":
            return self._ful(i, f.left, e, good, alive, memo) and \
                self._ful(i, f.right, e, good, alive, memo)
        return any(d in self.atoms[i] and self._ful(i, d, e, good, alive, memo)
                   for d in (f.left, f.right))

    def _ful_modal(self, i, arg, e, good, alive, memo) -> bool:
        for d, per_clause in self.edges[i]:
            ok = False
            for clause, ids in zip(d.clauses, per_clause):
                for j in ids:
                    if j in alive and (arg not in clause or self._ful(j, arg, e, good, alive, memo)):
                        ok = True
                        break
                if ok:
                    break
            if not ok:
                return False
        return True

    # ------------------------------------------------------------------ dump
    def to_dot(self, alive: Optional[set] = None) -> str:
        lines = ["digraph tableau {", "  node [shape=box, fontname=monospace];"]
        for i, atom in enumerate(self.atoms):
            status = "unexpanded" if self.edges[i] is None else \
                ("alive" if alive is None or i in alive else "pruned")
            label = atom_text(atom).replace('"', '\\"').replace("\\/", "\\\\/").replace("/\\", "/\\\\")
            extra = ", peripheries=2" if i in self.roots else ""
            lines.append(f'  n{i} [label="{i} [{status}]\\n{label}"{extra}];')
        for i, exp in enumerate(self.edges):
            for d, per_clause in exp or ():
                dl = to_text(d.formula).replace('"', '\\"').replace("\\/", "\\\\/").replace("/\\", "/\\\\")
                for j in sorted({j for ids in per_clause for j in ids}):
                    lines.append(f'  n{i} -> n{j} [label="{dl}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


_MENTIONS: dict = {}


def _mentions(f: Formula, e: Formula) -> bool:
    """e occurs in f outside fixed point arguments."""
    key = (f, e)
    r = _MENTIONS.get(key)
    if r is None:
        if f is e:
            r = True
        elif f.op in ("and", "or", "mod"):
            r = any(_mentions(a, e) for a in f.args)
        else:
            r = False
        _MENTIONS[key] = r
    return r


def saturate(seed, budget: Optional[int] = None, sig: Optional[Signature] = None) -> list:
    """Saturated atoms of ``seed`` (timed mode when ``budget`` is given)."""
    sig = sig or Signature.k()
    t = TableauGraph(sig, budget, DemandCache(sig))
    return t.saturate(seed)


# ---------------------------------------------------------------------------
# decision procedure

@dataclass
class SolverConfig:
    timeout_cap: Optional[int] = None  # largest time-out budget tried
    node_cap: int = 200_000
    bounds: CoefficientBounds = field(default_factory=CoefficientBounds)
    elimination: bool = True
    extract: bool = True
    record: Optional[set] = None  # collects every timed formula created


@dataclass
class Verdict:
    status: str  # SAT | UNSAT | UNKNOWN
    reason: str = ""
    model: object = None
    budget: Optional[int] = None
    stats: dict = field(default_factory=dict)
    tableau: Optional[TableauGraph] = None
    alive: Optional[set] = None

    def __str__(self) -> str:
        return self.status if not self.reason else f"{self.status} ({self.reason})"


def budget_schedule(sigma_size: int, cap: Optional[int]) -> list:
    """|S|, 2|S|, 4|S|, ... up to min(2^|S|, cap); both ends included."""
    top = 2 ** min(sigma_size, 62)
    if cap is not None:
        top = min(top, cap)
    b = max(1, sigma_size)
    out = []
    while b < top:
        out.append(b)
        b *= 2
    out.append(max(1, top))
    return out


def decide(phi: Formula, sig: Signature, config: Optional[SolverConfig] = None) -> Verdict:
    from .extract import ExtractionError, extract_model, verify_model
    config = config or SolverConfig()
    start = time.perf_counter()
    sigma = fischer_ladner(phi)
    exp_bound = 2 ** min(len(sigma), 62)
    cache = DemandCache(sig, config.bounds)
    stats: dict = {"fl_size": len(sigma), "rounds": 0, "atoms": 0, "expanded": 0,
                   "pruned": 0, "timeout_clashes": 0, "max_timeout": 0,
                   "stability_violations": 0, "elimination_atoms": 0}

    def merge(t: TableauGraph):
        s = t.stats
        stats["atoms"] += s.atoms
        stats["expanded"] += s.expanded
        stats["pruned"] += s.pruned
        stats["timeout_clashes"] += s.timeout_clashes
        stats["stability_violations"] += s.stability_violations
        stats["max_timeout"] = max(stats["max_timeout"], s.max_timeout)

    def done(status, reason="", **kw) -> Verdict:
        stats["demand_cache_hits"] = cache.hits
        stats["coefficient_bound_hit"] = int(cache.truncated)
        stats["seconds"] = time.perf_counter() - start
        return Verdict(status, reason, stats=stats, **kw)

    survives = None  # does a root survive eventuality elimination
    for budget in budget_schedule(len(sigma), config.timeout_cap):
        stats["rounds"] += 1
        stats["budget"] = budget
        t = TableauGraph(sig, budget, cache, config.node_cap, config.record)
        try:
            t.build(phi)
        except NodeCapExceeded as e:
            merge(t)
            return done("UNKNOWN", str(e), budget=budget, tableau=t)
        alive = t.prune()
        merge(t)
        live_roots = [r for r in t.roots if r in alive]
        if live_roots:
            if not config.extract:
                return done("SAT", budget=budget, tableau=t, alive=alive)
            try:
                model = extract_model(t, alive, live_roots[0])
            except ExtractionError as e:
                reason = f"model construction failed: {e}"
                if cache.truncated:
                    reason += " (graded coefficient bound reached)"
                return done("UNKNOWN", reason, budget=budget, tableau=t, alive=alive)
            problem = verify_model(model, t, phi)
            if problem:
                return done("UNKNOWN", f"model verification failed: {problem}",
                            model=model, budget=budget, tableau=t, alive=alive)
            return done("SAT", model=model, budget=budget, tableau=t, alive=alive)
        if t.stats.timeout_clashes == 0:
            return done("UNSAT", "no time-out expired", budget=budget, tableau=t, alive=alive)
        if config.elimination and survives is None:
            u = TableauGraph(sig, None, cache, config.node_cap)
            try:
                u.build(phi)
                keep = u.eliminate()
                survives = any(r in keep for r in u.roots)
            except NodeCapExceeded:
                survives = True  # inconclusive; keep deepening
            stats["elimination_atoms"] = u.stats.atoms
            if not survives:
                return done("UNSAT", "eventuality elimination", budget=budget, tableau=t,
                            alive=alive)
        if budget >= exp_bound:
            return done("UNSAT", f"time-out budget reached 2^{len(sigma)}", budget=budget,
                        tableau=t, alive=alive)
    return done("UNKNOWN", "time-out budget cap reached", budget=stats.get("budget"))


def format_stats(stats: dict) -> str:
    keys = ["fl_size", "rounds", "budget", "atoms", "expanded", "pruned", "timeout_clashes",
            "max_timeout", "elimination_atoms", "demand_cache_hits", "coefficient_bound_hit",
            "stability_violations"]
    return "\n".join(f"{k}: {stats[k]}" for k in keys if k in stats)
