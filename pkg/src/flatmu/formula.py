"""Formulas of flat fixed-point logics, kept in negation normal form.

Formulas are hash-consed: every constructor goes through a single intern
table, so structurally equal formulas are the same Python object and
equality/hashing are identity based.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

X = "x"  # argument variable of a fixed point body
P = "p"  # parameter variable of a fixed point body


@dataclass(frozen=True, order=True)
class Modality:
    """A unary modal operator.

    ``kind`` is ``"rel"`` (index = agent name, ``""`` for plain K) or
    ``"graded"`` (index = grade k; box is ``[k]``, diamond is ``<k>``).
    """

    kind: str
    index: object
    box: bool

    @property
    def dual(self) -> "Modality":
        return Modality(self.kind, self.index, not self.box)

    @property
    def graded(self) -> bool:
        return self.kind == "graded"

    def __str__(self) -> str:
        if self.kind == "graded":
            return f"[{{{self.index}}}]" if self.box else f"<{{{self.index}}}>"
        if self.index == "":
            return "[]" if self.box else "<>"
        return f"[{self.index}]" if self.box else f"<{self.index}>"


def box(agent: str = "") -> Modality:
    return Modality("rel", agent, True)


def diamond(agent: str = "") -> Modality:
    return Modality("rel", agent, False)


def gbox(k: int) -> Modality:
    return Modality("graded", int(k), True)


def gdiamond(k: int) -> Modality:
    return Modality("graded", int(k), False)


@dataclass(frozen=True)
class Signature:
    """Modal similarity type: which modalities exist and which atoms.

    ``kind`` is ``"k"``, ``"kn"`` or ``"graded"``.  ``atoms=None`` leaves the
    set of propositional atoms open (any identifier is an atom).
    """

    kind: str = "k"
    agents: tuple = ("",)
    atoms: Optional[frozenset] = None

    @classmethod
    def k(cls, atoms=None) -> "Signature":
        return cls("k", ("",), frozenset(atoms) if atoms is not None else None)

    @classmethod
    def kn(cls, agents, atoms=None) -> "Signature":
        if isinstance(agents, int):
            agents = tuple(str(i) for i in range(1, agents + 1))
        return cls("kn", tuple(str(a) for a in agents),
                   frozenset(atoms) if atoms is not None else None)

    @classmethod
    def graded(cls, atoms=None) -> "Signature":
        return cls("graded", (), frozenset(atoms) if atoms is not None else None)

    @classmethod
    def from_flag(cls, flag: str) -> "Signature":
        if flag == "k":
            return cls.k()
        if flag == "graded":
            return cls.graded()
        if flag.startswith("kn:"):
            rest = flag[3:]
            if rest.isdigit():
                return cls.kn(int(rest))
            return cls.kn(tuple(a for a in rest.split(",") if a))
        raise ValueError(f"unknown logic {flag!r} (expected k, kn:<agents> or graded)")

    @property
    def flag(self) -> str:
        if self.kind == "kn":
            return "kn:" + ",".join(self.agents)
        return self.kind

    def accepts(self, mod: Modality) -> bool:
        if self.kind == "graded":
            return mod.kind == "graded" and isinstance(mod.index, int) and mod.index >= 0
        return mod.kind == "rel" and mod.index in self.agents

    def modalities(self) -> list:
        """(name, dual name, modality) triples for the relational operators.

        Graded signatures have one box/diamond pair per grade, so only the
        schema is listed (grade ``k``).
        """
        if self.kind == "graded":
            return [("[{k}]", "<{k}>", "graded(k, box)"), ("<{k}>", "[{k}]", "graded(k, diamond)")]
        out = []
        for a in self.agents:
            b, d = box(a), diamond(a)
            out.append((str(b), str(d), b))
            out.append((str(d), str(b), d))
        return out

    def has_atom(self, name: str) -> bool:
        return self.atoms is None or name in self.atoms


_OPS = ("bot", "top", "var", "nvar", "prop", "nprop", "and", "or", "mod", "mu", "nu")
_OP_RANK = {op: i for i, op in enumerate(_OPS)}


class Formula:
    """An interned NNF formula node.

    ``op`` is one of ``bot top var nvar prop nprop and or mod mu nu``.  For
    ``mu`` nodes ``timeout`` is ``None`` (meaning omega) or a natural number;
    only timed-out formulas inside the tableau carry finite time-outs.
    """

    __slots__ = ("op", "args", "name", "mod", "fdef", "timeout", "uid",
                 "_neg", "_strip", "_text", "_hasx", "_size", "__weakref__")

    def __repr__(self) -> str:
        return f"Formula({to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)

    def __lt__(self, other: "Formula") -> bool:
        return sort_key(self) < sort_key(other)

    @property
    def left(self) -> "Formula":
        return self.args[0]

    @property
    def right(self) -> "Formula":
        return self.args[1]

    @property
    def arg(self) -> "Formula":
        return self.args[0]

    @property
    def is_fix(self) -> bool:
        return self.op == "mu" or self.op == "nu"

    @property
    def is_literal(self) -> bool:
        """Modal literal or propositional literal (nullary modality)."""
        return self.op in ("mod", "prop", "nprop")


_TABLE: dict = {}
_LOCK = threading.RLock()
_COUNTER = [0]


def _mk(op, args=(), name=None, mod=None, fdef=None, timeout=None) -> Formula:
    key = (op, name, mod, fdef, timeout) + tuple(args)
    f = _TABLE.get(key)
    if f is not None:
        return f
    with _LOCK:
        f = _TABLE.get(key)
        if f is not None:
            return f
        f = object.__new__(Formula)
        f.op = op
        f.args = tuple(args)
        f.name = name
        f.mod = mod
        f.fdef = fdef
        f.timeout = timeout
        _COUNTER[0] += 1
        f.uid = _COUNTER[0]
        f._neg = None
        f._strip = None
        f._text = None
        f._hasx = None
        f._size = None
        _TABLE[key] = f
        return f


TOP = _mk("top")
BOT = _mk("bot")


def prop(name: str) -> Formula:
    return _mk("prop", name=name)


def nprop(name: str) -> Formula:
    return _mk("nprop", name=name)


def var(name: str = X) -> Formula:
    return _mk("var", name=name)


def nvar(name: str = X) -> Formula:
    return _mk("nvar", name=name)


def conj(a: Formula, b: Formula) -> Formula:
    return _mk("and", (a, b))


def disj(a: Formula, b: Formula) -> Formula:
    return _mk("or", (a, b))


def modal(mod: Modality, a: Formula) -> Formula:
    return _mk("mod", (a,), mod=mod)


def mu(fdef: "FixpointDef", a: Formula, timeout: Optional[int] = None) -> Formula:
    if timeout is not None and timeout < 0:
        raise ValueError("negative time-out")
    return _mk("mu", (a,), fdef=fdef, timeout=timeout)


def nu(fdef: "FixpointDef", a: Formula) -> Formula:
    return _mk("nu", (a,), fdef=fdef)


def conj_all(items: Iterable[Formula]) -> Formula:
    """Right-nested conjunction with constant folding (empty -> top)."""
    items = [f for f in items if f is not TOP]
    if any(f is BOT for f in items):
        return BOT
    if not items:
        return TOP
    out = items[-1]
    for f in reversed(items[:-1]):
        out = conj(f, out)
    return out


def disj_all(items: Iterable[Formula]) -> Formula:
    """Right-nested disjunction with constant folding (empty -> bot)."""
    items = [f for f in items if f is not BOT]
    if any(f is TOP for f in items):
        return TOP
    if not items:
        return BOT
    out = items[-1]
    for f in reversed(items[:-1]):
        out = disj(f, out)
    return out


class FixpointDef:
    """A flat fixed point operator given by its least-fixpoint body.

    ``body`` is the modal formula gamma over the argument variable ``x`` and
    parameter ``p``; ``sharp(phi) = mu x. gamma(phi, x)`` and the dual
    ``flat(phi) = nu x. dual(gamma)(phi, x)``.  Definitions are interned by
    body, so declaring AF and EG yields one object carrying both names.
    """

    __slots__ = ("body", "dual_body", "mu_name", "nu_name", "_unfold", "__weakref__")
    _registry: dict = {}

    def __new__(cls, body: Formula):
        existing = cls._registry.get(body)
        if existing is not None:
            return existing
        with _LOCK:
            existing = cls._registry.get(body)
            if existing is not None:
                return existing
            self = object.__new__(cls)
            self.body = body
            self.dual_body = dual(body)
            self.mu_name = None
            self.nu_name = None
            self._unfold = {}
            cls._registry[body] = self
            return self

    def __init__(self, body: Formula):
        pass

    def __repr__(self) -> str:
        return f"FixpointDef({to_text(self.body)!r})"

    def __lt__(self, other: "FixpointDef") -> bool:
        return sort_key(self.body) < sort_key(other.body)

    @property
    def label(self) -> str:
        return self.mu_name or f"mu x . {to_text(self.body)}"

    def unfold(self, f: Formula) -> Formula:
        """gamma(phi, f) for f = sharp(phi)^k, dual(gamma)(phi, f) for flat(phi)."""
        r = self._unfold.get(f)
        if r is None:
            body = self.body if f.op == "mu" else self.dual_body
            r = substitute(body, f, strip(f.arg))
            self._unfold[f] = r
        return r


# ---------------------------------------------------------------------------
# traversal helpers

def subformulas(f: Formula) -> Iterator[Formula]:
    """Distinct subformulas, pre-order, fixed point arguments included."""
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        yield g
        stack.extend(reversed(g.args))


def contains_x(f: Formula) -> bool:
    if f._hasx is None:
        if f.op in ("var", "nvar"):
            f._hasx = f.name == X
        else:
            f._hasx = any(contains_x(a) for a in f.args)
    return f._hasx


def has_vars(f: Formula) -> bool:
    return any(g.op in ("var", "nvar") for g in subformulas(f))


def has_fixpoints(f: Formula) -> bool:
    return any(g.is_fix for g in subformulas(f))


def modalities_of(f: Formula) -> set:
    mods = {g.mod for g in subformulas(f) if g.op == "mod"}
    for g in subformulas(f):
        if g.is_fix:
            mods |= modalities_of(g.fdef.body) | modalities_of(g.fdef.dual_body)
    return mods


def atoms_of(f: Formula) -> set:
    out = {g.name for g in subformulas(f) if g.op in ("prop", "nprop")}
    for g in subformulas(f):
        if g.is_fix:
            out |= {h.name for h in subformulas(g.fdef.body) if h.op in ("prop", "nprop")}
    return out


# ---------------------------------------------------------------------------
# negation, duals, substitution

def negate(f: Formula) -> Formula:
    """NNF of the negation of ``f`` (defined for untimed formulas)."""
    if f._neg is not None:
        return f._neg
    op = f.op
    if op == "top":
        r = BOT
    elif op == "bot":
        r = TOP
    elif op == "prop":
        r = nprop(f.name)
    elif op == "nprop":
        r = prop(f.name)
    elif op == "var":
        r = nvar(f.name)
    elif op == "nvar":
        r = var(f.name)
    elif op == "and":
        r = disj(negate(f.left), negate(f.right))
    elif op == "or":
        r = conj(negate(f.left), negate(f.right))
    elif op == "mod":
        r = modal(f.mod.dual, negate(f.arg))
    elif op == "mu":
        if f.timeout is not None:
            raise ValueError("negate is not defined on formulas with finite time-outs")
        r = nu(f.fdef, negate(f.arg))
    elif op == "nu":
        r = mu(f.fdef, negate(f.arg))
    else:  # pragma: no cover
        raise AssertionError(op)
    f._neg = r
    r._neg = f
    return r


def _flip_vars(f: Formula) -> Formula:
    op = f.op
    if op == "var":
        return nvar(f.name)
    if op == "nvar":
        return var(f.name)
    if not f.args:
        return f
    if op == "and":
        return conj(_flip_vars(f.left), _flip_vars(f.right))
    if op == "or":
        return disj(_flip_vars(f.left), _flip_vars(f.right))
    if op == "mod":
        return modal(f.mod, _flip_vars(f.arg))
    return f  # fixed point formulas carry no variables


def dual(gamma: Formula) -> Formula:
    """The dual of a modal formula: the negation with every variable flipped."""
    return _flip_vars(negate(gamma))


def substitute(gamma, arg: Formula, param: Formula) -> Formula:
    """gamma[param/p; arg/x].  Plain replacement; x and p have no binders."""
    if isinstance(gamma, FixpointDef):
        gamma = gamma.body
    memo: dict = {}

    def go(g: Formula) -> Formula:
        r = memo.get(g)
        if r is not None:
            return r
        op = g.op
        if op == "var":
            r = arg if g.name == X else param if g.name == P else g
        elif op == "nvar":
            r = negate(arg) if g.name == X else negate(param) if g.name == P else g
        elif op == "and":
            r = conj(go(g.left), go(g.right))
        elif op == "or":
            r = disj(go(g.left), go(g.right))
        elif op == "mod":
            r = modal(g.mod, go(g.arg))
        else:
            r = g
        memo[g] = r
        return r

    return go(gamma)


def strip(f: Formula) -> Formula:
    """Erase all time-outs (the t-translation)."""
    if f._strip is None:
        op = f.op
        if not f.args:
            r = f
        elif op == "and":
            r = conj(strip(f.left), strip(f.right))
        elif op == "or":
            r = disj(strip(f.left), strip(f.right))
        elif op == "mod":
            r = modal(f.mod, strip(f.arg))
        elif op == "mu":
            r = mu(f.fdef, f.arg) if f.timeout is not None else f
        else:
            r = f
        f._strip = r
    return f._strip


# ---------------------------------------------------------------------------
# syntactic checks on fixed point bodies

def _body(g) -> Formula:
    return g.body if isinstance(g, FixpointDef) else g


def check_guarded(gamma) -> bool:
    """Every occurrence of x lies under at least one modality."""
    def go(f: Formula, depth: int) -> bool:
        if f.op in ("var", "nvar"):
            return f.name != X or depth > 0
        if f.op == "mod":
            return go(f.arg, depth + 1)
        if f.op in ("and", "or"):
            return go(f.left, depth) and go(f.right, depth)
        return True
    return go(_body(gamma), 0)


def check_monotone(gamma) -> bool:
    """Neither the negated argument nor the negated parameter occurs."""
    return not any(g.op == "nvar" for g in subformulas(_body(gamma)))


def _x_depths(f: Formula, depth: int, out: set) -> None:
    if f.op in ("var", "nvar"):
        if f.name == X:
            out.add(depth)
    elif f.op == "mod":
        _x_depths(f.arg, depth + 1, out)
    elif f.op in ("and", "or"):
        _x_depths(f.left, depth, out)
        _x_depths(f.right, depth, out)


def uniform_depth(gamma) -> Optional[int]:
    """Common modal depth of all x occurrences; 0 if x does not occur."""
    depths: set = set()
    _x_depths(_body(gamma), 0, depths)
    if not depths:
        return 0
    if len(depths) == 1:
        return depths.pop()
    return None


def _replace(f: Formula, target: Formula, by: Formula) -> Formula:
    if f is target:
        return by
    if f.op == "and":
        return conj(_replace(f.left, target, by), _replace(f.right, target, by))
    if f.op == "or":
        return disj(_replace(f.left, target, by), _replace(f.right, target, by))
    if f.op == "mod":
        return modal(f.mod, _replace(f.arg, target, by))
    return f


def check_admissible(gamma) -> bool:
    """Membership in the closure of monotone uniform formulas under
    disjunction, conjunction with x-free formulas and composition.

    Only guarded bodies qualify, so a bare x never serves as a depth-0
    building block.
    """
    body = _body(gamma)
    if not check_monotone(body) or not check_guarded(body):
        return False
    memo: dict = {}

    def adm(f: Formula) -> bool:
        if f in memo:
            return memo[f]
        memo[f] = False  # guards against cyclic decompositions
        ok = uniform_depth(f) is not None
        if not ok and f.op == "or":
            ok = adm(f.left) and adm(f.right)
        if not ok and f.op == "and":
            if not contains_x(f.left):
                ok = adm(f.right)
            elif not contains_x(f.right):
                ok = adm(f.left)
        if not ok:
            # f = delta(eps) with eps a proper x-containing subformula
            x = var(X)
            for eps in subformulas(f):
                if eps is f or eps is x or not contains_x(eps):
                    continue
                delta = _replace(f, eps, x)
                if delta is f or contains_x(_replace(delta, x, TOP)):
                    continue  # some x lies outside the eps occurrences
                if adm(delta) and adm(eps):
                    ok = True
                    break
        memo[f] = ok
        return ok

    return adm(body)


class DefinitionError(ValueError):
    pass


def validate_body(body: Formula) -> None:
    """Raise DefinitionError unless body is a valid flat fixed point body."""
    for g in subformulas(body):
        if g.is_fix:
            raise DefinitionError("fixed point bodies must be modal formulas (no nested fixpoints)")
        if g.op in ("var", "nvar") and g.name not in (X, P):
            raise DefinitionError(f"unexpected variable {g.name!r} in body")
    if not contains_x(body):
        raise DefinitionError("fixed point body does not mention its argument variable")
    if not check_monotone(body):
        raise DefinitionError("fixed point body is not monotone (negated variable)")
    if not check_guarded(body):
        raise DefinitionError("fixed point body is not guarded")
    if not check_admissible(body):
        raise DefinitionError("fixed point body is not admissible")


# ---------------------------------------------------------------------------
# Fischer-Ladner closure and size

def fischer_ladner(phi: Formula) -> frozenset:
    """Least set containing phi closed under subformulas, negation and
    unfolding of fixed point formulas."""
    out: set = set()
    todo = [phi]
    while todo:
        f = todo.pop()
        if f in out:
            continue
        out.add(f)
        todo.append(negate(f))
        todo.extend(f.args)
        if f.is_fix:
            todo.append(f.fdef.unfold(f))
    return frozenset(out)


def grade_cost(k: int) -> int:
    return math.ceil(math.log2(k + 2))


def size(f: Formula) -> int:
    """Node count; each grade k adds ceil(log2(k+2)) (binary coding) and a
    fixed point node adds the size of its body."""
    if f._size is None:
        s = 1 + sum(size(a) for a in f.args)
        if f.op == "mod" and f.mod.kind == "graded":
            s += grade_cost(f.mod.index)
        elif f.is_fix:
            s += size(f.fdef.body)
        f._size = s
    return f._size


def sort_key(f: Formula) -> tuple:
    """Process-independent total order on formulas."""
    return (_OP_RANK[f.op], to_text(f))


# ---------------------------------------------------------------------------
# printing

_PREC = {"or": 1, "and": 2}


def to_text(f: Formula) -> str:
    """Concrete syntax accepted by the parser (time-outs print as ``^k``)."""
    if f._text is None:
        f._text = _print(f)
    return f._text


def _operand(f: Formula, level: int) -> str:
    s = to_text(f)
    if f.op in _PREC and _PREC[f.op] < level:
        return f"({s})"
    if f.op in ("mu", "nu") and s.startswith(("mu ", "nu ")):
        return f"({s})"
    return s


def _print(f: Formula) -> str:
    op = f.op
    if op == "top":
        return "true"
    if op == "bot":
        return "false"
    if op in ("prop", "var"):
        return f.name
    if op in ("nprop", "nvar"):
        return "~" + f.name
    if op in ("and", "or"):
        sym = " /\\ " if op == "and" else " \\/ "
        lvl = _PREC[op]
        right = _operand(f.right, lvl + 1)
        return _operand(f.left, lvl) + sym + right
    if op == "mod":
        return f"{f.mod} {_operand(f.arg, 3)}"
    fd = f.fdef
    if op == "mu":
        if fd.mu_name:
            s = f"{fd.mu_name}({to_text(f.arg)})"
        else:
            s = "mu x . " + to_text(substitute(fd.body, var(X), f.arg))
    else:
        if fd.nu_name:
            s = f"{fd.nu_name}({to_text(f.arg)})"
        else:
            s = "nu x . " + to_text(substitute(fd.dual_body, var(X), f.arg))
    if op == "mu" and f.timeout is not None:
        s = f"({s})^{f.timeout}" if s.startswith("mu ") else f"{s}^{f.timeout}"
    return s
