"""Finite Kripke frames and multigraphs, and a fixed point model checker.

State sets are bitmasks (bit i = state i).  ``evaluate`` works on one model
with Python integers; ``BatchModels`` evaluates a formula on many models of
the same size at once with numpy.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .formula import Formula, Signature, X, P


class ModelSpaceTooLarge(ValueError):
    def __init__(self, estimate: int, limit: int):
        self.estimate = estimate
        super().__init__(f"refusing to enumerate about {estimate} models (limit {limit})")


class SignatureMismatch(ValueError):
    pass


@dataclass
class ConcreteModel:
    """A finite model with ``n`` states.

    Kripke models keep ``succ[agent][s]`` as successor bitmasks; multigraphs
    keep ``mult[s]`` as a dict ``target -> multiplicity``.  ``valuation``
    maps atom names to state bitmasks (absent atoms are false everywhere).
    """

    kind: str
    n: int
    succ: dict = field(default_factory=dict)
    mult: list = field(default_factory=list)
    valuation: dict = field(default_factory=dict)
    agents: tuple = ("",)
    root: int = 0
    labels: Optional[list] = None  # optional provenance, e.g. tableau atoms

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @classmethod
    def kripke(cls, n: int, edges, valuation=None, agents=("",), root: int = 0) -> "ConcreteModel":
        """``edges``: iterable of (src, dst) or (agent, src, dst)."""
        succ = {a: [0] * n for a in agents}
        for e in edges:
            a, s, t = ("", *e) if len(e) == 2 else e
            succ[str(a)][s] |= 1 << t
        return cls("kripke", n, succ=succ, valuation=_val(valuation or {}),
                   agents=tuple(agents), root=root)

    @classmethod
    def multigraph(cls, n: int, triples, valuation=None, root: int = 0) -> "ConcreteModel":
        """``triples``: iterable of (src, dst, multiplicity)."""
        mult = [dict() for _ in range(n)]
        for s, t, m in triples:
            if m:
                mult[s][t] = mult[s].get(t, 0) + int(m)
        return cls("multigraph", n, mult=mult, valuation=_val(valuation or {}),
                   agents=(), root=root)

    def states_of(self, mask: int) -> list:
        return [i for i in range(self.n) if mask >> i & 1]

    # exchange format
    def to_dict(self) -> dict:
        out = {"kind": self.kind, "states": self.n, "root": self.root}
        if self.kind == "kripke":
            out["agents"] = list(self.agents)
            out["transitions"] = {
                a: [self.states_of(self.succ[a][s]) for s in range(self.n)] for a in self.agents}
        else:
            out["multiplicities"] = [
                [s, t, m] for s in range(self.n) for t, m in sorted(self.mult[s].items())]
        out["valuation"] = {a: self.states_of(m) for a, m in sorted(self.valuation.items())}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ConcreteModel":
        n = int(d["states"])
        val = {a: set(v) for a, v in d.get("valuation", {}).items()}
        if d["kind"] == "kripke":
            agents = tuple(d.get("agents", [""]))
            edges = [(a, s, t) for a in agents
                     for s, ts in enumerate(d["transitions"][a]) for t in ts]
            return cls.kripke(n, edges, val, agents, root=d.get("root", 0))
        if d["kind"] == "multigraph":
            return cls.multigraph(n, [tuple(x) for x in d["multiplicities"]], val,
                                  root=d.get("root", 0))
        raise ValueError(f"unknown model kind {d['kind']!r}")

    @classmethod
    def from_json(cls, text: str) -> "ConcreteModel":
        return cls.from_dict(json.loads(text))


def _val(valuation: dict) -> dict:
    out = {}
    for a, v in valuation.items():
        if isinstance(v, int):
            out[a] = v
        else:
            m = 0
            for s in v:
                m |= 1 << s
            out[a] = m
    return out


# ---------------------------------------------------------------------------
# predicate liftings

def lift_relational(A: int, successors: int, box: bool) -> bool:
    """[] : successors within A; <> : some successor in A."""
    if box:
        return successors & ~A == 0
    return successors & A != 0


def lift_graded(A: int, multiplicities: dict, k: int, box: bool) -> bool:
    """<k> : mass into A exceeds k; [k] : mass outside A is at most k."""
    if box:
        return sum(m for t, m in multiplicities.items() if not A >> t & 1) <= k
    return sum(m for t, m in multiplicities.items() if A >> t & 1) > k


# ---------------------------------------------------------------------------
# scalar evaluation

def evaluate(model: ConcreteModel, phi: Formula, env: Optional[dict] = None) -> int:
    """Denotation of ``phi`` as a bitmask.  Finite time-outs on ``mu`` nodes
    are read as that many Kleene iterations from the empty set."""
    return _Evaluator(model).run(phi, env or {})


def eval_states(model: ConcreteModel, phi: Formula) -> set:
    return set(model.states_of(evaluate(model, phi)))


def holds(model: ConcreteModel, phi: Formula, state: Optional[int] = None) -> bool:
    s = model.root if state is None else state
    return bool(evaluate(model, phi) >> s & 1)


class _Evaluator:
    def __init__(self, model: ConcreteModel):
        self.m = model
        self.full = model.full
        self.memo: dict = {}
        self.iterations = 0

    def run(self, f: Formula, env: dict) -> int:
        if not env:
            r = self.memo.get(f)
            if r is not None:
                return r
        r = self._eval(f, env)
        if not env:
            self.memo[f] = r
        return r

    def _eval(self, f: Formula, env: dict) -> int:
        op, m = f.op, self.m
        if op == "top":
            return self.full
        if op == "bot":
            return 0
        if op == "prop":
            return m.valuation.get(f.name, 0) & self.full
        if op == "nprop":
            return ~m.valuation.get(f.name, 0) & self.full
        if op in ("var", "nvar"):
            if f.name not in env:
                raise ValueError(f"free variable {f.name!r}")
            v = env[f.name]
            return v if op == "var" else ~v & self.full
        if op == "and":
            return self.run(f.left, env) & self.run(f.right, env)
        if op == "or":
            return self.run(f.left, env) | self.run(f.right, env)
        if op == "mod":
            return self._modal(f, self.run(f.arg, env))
        arg = self.run(f.arg, env)
        fd = f.fdef
        body = fd.body if op == "mu" else fd.dual_body
        cur = 0 if op == "mu" else self.full
        if op == "mu" and f.timeout is not None:
            for _ in range(f.timeout):
                cur = self._eval(body, {X: cur, P: arg})
            return cur
        while True:
            self.iterations += 1
            nxt = self._eval(body, {X: cur, P: arg})
            if nxt == cur:
                return cur
            cur = nxt

    def _modal(self, f: Formula, A: int) -> int:
        m, mod = self.m, f.mod
        out = 0
        if mod.kind == "graded":
            if m.kind != "multigraph":
                raise SignatureMismatch("graded modality on a Kripke model")
            for s in range(m.n):
                if lift_graded(A, m.mult[s], mod.index, mod.box):
                    out |= 1 << s
            return out
        if m.kind != "kripke":
            raise SignatureMismatch("relational modality on a multigraph")
        succ = m.succ.get(mod.index)
        if succ is None:
            raise SignatureMismatch(f"model has no agent {mod.index!r}")
        for s in range(m.n):
            if lift_relational(A, succ[s], mod.box):
                out |= 1 << s
        return out


def kleene_chain(model: ConcreteModel, phi: Formula) -> list:
    """Iterates of a top-level fixed point formula, from bottom (or top)."""
    ev = _Evaluator(model)
    arg = ev.run(phi.arg, {})
    body = phi.fdef.body if phi.op == "mu" else phi.fdef.dual_body
    cur = 0 if phi.op == "mu" else model.full
    chain = [cur]
    while True:
        nxt = ev._eval(body, {X: cur, P: arg})
        if nxt == cur:
            return chain
        chain.append(nxt)
        cur = nxt


# ---------------------------------------------------------------------------
# enumeration

def count_models(kind: str, n: int, atoms, max_multiplicity: int = 3, agents=("",)) -> int:
    vals = 2 ** (n * len(atoms))
    if kind == "kripke":
        return vals * 2 ** (n * n * len(agents))
    return vals * (max_multiplicity + 1) ** (n * n)


def enumerate_models(kind: str, max_states: int, atoms, max_multiplicity: int = 3,
                     agents=("",), limit: int = 2_000_000,
                     min_states: int = 1) -> Iterator[ConcreteModel]:
    """All models with ``min_states..max_states`` states (no symmetry reduction)."""
    atoms = sorted(atoms)
    agents = tuple(agents)
    total = sum(count_models(kind, n, atoms, max_multiplicity, agents)
                for n in range(min_states, max_states + 1))
    if total > limit:
        raise ModelSpaceTooLarge(total, limit)
    for n in range(min_states, max_states + 1):
        full = 1 << n
        vals = list(itertools.product(range(full), repeat=len(atoms)))
        if kind == "kripke":
            for rel in itertools.product(range(full), repeat=n * len(agents)):
                succ = {a: list(rel[i * n:(i + 1) * n]) for i, a in enumerate(agents)}
                for v in vals:
                    yield ConcreteModel("kripke", n, succ=succ, valuation=dict(zip(atoms, v)),
                                        agents=agents)
        elif kind == "multigraph":
            for ms in itertools.product(range(max_multiplicity + 1), repeat=n * n):
                mult = [{t: ms[s * n + t] for t in range(n) if ms[s * n + t]} for s in range(n)]
                for v in vals:
                    yield ConcreteModel("multigraph", n, mult=mult,
                                        valuation=dict(zip(atoms, v)), agents=())
        else:
            raise ValueError(f"unknown model kind {kind!r}")


def model_kind(sig: Signature) -> str:
    return "multigraph" if sig.kind == "graded" else "kripke"


# ---------------------------------------------------------------------------
# batch evaluation over all frames of one size

class BatchModels:
    """``F`` models over the same ``n`` states, evaluated simultaneously.

    Kripke: ``succ[agent]`` has shape (F, n) of successor bitmasks.
    Multigraph: ``mult`` has shape (F, n, n).  ``valuation[atom]`` has
    shape (F,).  Results are (F,) arrays of state bitmasks.
    """

    def __init__(self, kind: str, n: int, size: int, succ=None, mult=None,
                 valuation=None, agents=("",)):
        self.kind, self.n, self.size = kind, n, size
        self.succ = succ or {}
        self.mult = mult
        self.valuation = valuation or {}
        self.agents = tuple(agents)
        self.full = np.uint32((1 << n) - 1)
        self._bits = np.arange(n, dtype=np.uint32)

    @classmethod
    def all_kripke(cls, n: int, atoms, agents=("",)) -> "BatchModels":
        """Every frame times every valuation, frames varying fastest."""
        atoms, agents = sorted(atoms), tuple(agents)
        frames = 1 << (n * n * len(agents))
        vals = 1 << (n * len(atoms))
        idx = np.arange(frames * vals, dtype=np.int64)
        fr, va = idx % frames, idx // frames
        succ = {}
        for i, a in enumerate(agents):
            cols = [(fr >> ((i * n + s) * n)) & ((1 << n) - 1) for s in range(n)]
            succ[a] = np.stack(cols, axis=1).astype(np.uint32)
        valuation = {p: ((va >> (j * n)) & ((1 << n) - 1)).astype(np.uint32)
                     for j, p in enumerate(atoms)}
        return cls("kripke", n, frames * vals, succ=succ, valuation=valuation, agents=agents)

    @classmethod
    def kripke_frames(cls, n: int, agents=("",)) -> "BatchModels":
        """Every frame with ``n`` states and an empty valuation."""
        m = cls.all_kripke(n, (), agents)
        return m

    def with_valuation(self, valuation: dict) -> "BatchModels":
        """Same frames, one fixed valuation (atom -> bitmask) for all of them."""
        val = {p: np.full(self.size, v, dtype=np.uint32) for p, v in valuation.items()}
        return BatchModels(self.kind, self.n, self.size, succ=self.succ, mult=self.mult,
                           valuation=val, agents=self.agents)

    @classmethod
    def all_multigraphs(cls, n: int, atoms, max_multiplicity: int) -> "BatchModels":
        atoms = sorted(atoms)
        base = max_multiplicity + 1
        frames = base ** (n * n)
        vals = 1 << (n * len(atoms))
        idx = np.arange(frames * vals, dtype=np.int64)
        fr, va = idx % frames, idx // frames
        digits = [(fr // base ** k) % base for k in range(n * n)]
        mult = np.stack(digits, axis=1).reshape(-1, n, n).astype(np.int64)
        valuation = {p: ((va >> (j * n)) & ((1 << n) - 1)).astype(np.uint32)
                     for j, p in enumerate(atoms)}
        return cls("multigraph", n, frames * vals, mult=mult, valuation=valuation, agents=())

    def model(self, i: int) -> ConcreteModel:
        val = {p: int(v[i]) for p, v in self.valuation.items()}
        if self.kind == "kripke":
            succ = {a: [int(x) for x in self.succ[a][i]] for a in self.agents}
            return ConcreteModel("kripke", self.n, succ=succ, valuation=val, agents=self.agents)
        mult = [{t: int(self.mult[i, s, t]) for t in range(self.n) if self.mult[i, s, t]}
                for s in range(self.n)]
        return ConcreteModel("multigraph", self.n, mult=mult, valuation=val, agents=())

    def evaluate(self, phi: Formula) -> np.ndarray:
        memo: dict = {}
        return self._eval(phi, {}, memo)

    def _eval(self, f: Formula, env: dict, memo: dict) -> np.ndarray:
        if not env and f in memo:
            return memo[f]
        r = self._eval1(f, env, memo)
        if not env:
            memo[f] = r
        return r

    def _eval1(self, f: Formula, env: dict, memo: dict) -> np.ndarray:
        op, full = f.op, self.full
        if op == "top":
            return np.full(self.size, full, dtype=np.uint32)
        if op == "bot":
            return np.zeros(self.size, dtype=np.uint32)
        if op in ("prop", "nprop"):
            v = self.valuation.get(f.name)
            if v is None:
                v = np.zeros(self.size, dtype=np.uint32)
            return v if op == "prop" else (~v) & full
        if op in ("var", "nvar"):
            v = env[f.name]
            return v if op == "var" else (~v) & full
        if op == "and":
            return self._eval(f.left, env, memo) & self._eval(f.right, env, memo)
        if op == "or":
            return self._eval(f.left, env, memo) | self._eval(f.right, env, memo)
        if op == "mod":
            return self._modal(f, self._eval(f.arg, env, memo))
        arg = self._eval(f.arg, env, memo)
        body = f.fdef.body if op == "mu" else f.fdef.dual_body
        cur = np.zeros(self.size, dtype=np.uint32) if op == "mu" else \
            np.full(self.size, full, dtype=np.uint32)
        if op == "mu" and f.timeout is not None:
            for _ in range(f.timeout):
                cur = self._eval(body, {X: cur, P: arg}, memo)
            return cur
        for _ in range(self.n + 2):
            nxt = self._eval(body, {X: cur, P: arg}, memo)
            if np.array_equal(nxt, cur):
                return cur
            cur = nxt
        raise AssertionError("Kleene iteration did not converge")

    def _modal(self, f: Formula, A: np.ndarray) -> np.ndarray:
        mod, n = f.mod, self.n
        out = np.zeros(self.size, dtype=np.uint32)
        if mod.kind == "graded":
            if self.kind != "multigraph":
                raise SignatureMismatch("graded modality on Kripke models")
            inside = ((A[:, None] >> self._bits) & 1).astype(np.int64)  # (F, n)
            mass_in = np.einsum("fst,ft->fs", self.mult, inside)
            if mod.box:
                mass_out = self.mult.sum(axis=2) - mass_in
                ok = mass_out <= mod.index
            else:
                ok = mass_in > mod.index
            weights = (np.uint32(1) << self._bits)
            return (ok.astype(np.uint32) * weights).sum(axis=1).astype(np.uint32)
        if self.kind != "kripke":
            raise SignatureMismatch("relational modality on multigraphs")
        succ = self.succ[mod.index]
        for s in range(n):
            if mod.box:
                ok = (succ[:, s] & ~A & self.full) == 0
            else:
                ok = (succ[:, s] & A) != 0
            out |= ok.astype(np.uint32) << np.uint32(s)
        return out
