"""Concrete syntax for formulas and fixed point declarations.

Grammar (lowest precedence first)::

    formula := disj ('->' formula)?
    disj    := conj ('\\/' conj)*
    conj    := unary ('/\\' unary)*
    unary   := '~' unary | MOD unary | ('mu'|'nu') IDENT '.' formula | postfix
    postfix := primary ('^' NUMBER)?
    primary := 'true' | 'false' | '(' formula ')' | IDENT '(' formula ')' | IDENT

``MOD`` is ``[]``/``<>``, ``[i]``/``<i>`` for agent i, or ``[{k}]``/``<{k}>``
for grade k.  Declarations read ``def NAME(p) = mu x . BODY`` (or ``nu``).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .formula import (BOT, P, TOP, X, DefinitionError, FixpointDef, Formula, Modality,
                      Signature, box, conj, conj_all, contains_x, diamond, disj, dual,
                      gbox, gdiamond, has_fixpoints, has_vars, modal, mu, negate, nu, prop,
                      validate_body, var)


class ParseError(ValueError):
    def __init__(self, message: str, pos: int = 0, text: str = ""):
        self.pos = pos
        self.text = text
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line, self.col = line, col
        super().__init__(f"{message} at line {line}, column {col}")


_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<gmod>[\[<]\{\s*\d+\s*\}[\]>])
  | (?P<mod>\[\s*[A-Za-z0-9_]*\s*\]|<\s*[A-Za-z0-9_]*\s*>)
  | (?P<imp>->)
  | (?P<and>/\\)
  | (?P<or>\\/)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[~().=;^,:])
""", re.VERBOSE)

KEYWORDS = {"true", "false", "mu", "nu", "def", "logic", "query", "expect"}


@dataclass
class Token:
    kind: str
    value: str
    pos: int


def tokenize(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    out.append(Token("eof", "", pos))
    return out


class Definitions:
    """Name table for flat fixed point operators.

    Declared names map to ``(kind, FixpointDef)``; anonymous fixed points met
    while parsing are remembered too so their printed forms parse back.
    """

    def __init__(self):
        self.names: dict = {}
        self.anonymous: list = []

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def __iter__(self):
        return iter(self.names.items())

    def declare(self, name: str, kind: str, body: Formula) -> FixpointDef:
        """Register ``name(p) = kind x . body``; returns the interned operator."""
        if kind not in ("mu", "nu"):
            raise DefinitionError(f"unknown fixed point kind {kind!r}")
        if name in self.names:
            raise DefinitionError(f"duplicate definition {name!r}")
        gamma = body if kind == "mu" else dual(body)
        validate_body(gamma)
        fd = FixpointDef(gamma)
        if kind == "mu":
            fd.mu_name = name
        else:
            fd.nu_name = name
        self.names[name] = (kind, fd)
        return fd

    def lookup(self, name: str):
        return self.names.get(name)

    def known(self) -> list:
        """All operators in declaration order, anonymous ones last."""
        seen, out = set(), []
        for _, fd in self.names.values():
            if fd not in seen:
                seen.add(fd)
                out.append(fd)
        for fd in self.anonymous:
            if fd not in seen:
                seen.add(fd)
                out.append(fd)
        return out

    def remember(self, fd: FixpointDef) -> None:
        if fd not in self.anonymous:
            self.anonymous.append(fd)


def standard_definitions(sig: Signature, until_atom: str = "a") -> Definitions:
    """AF, EF, AG, EG, AU, EU and CK; the untils keep ``until_atom`` as
    their fixed left operand (A[a U p] and E[a U p])."""
    defs = Definitions()
    x, p = var(X), var(P)
    if sig.kind == "graded":
        defs.declare("MORE", "mu", disj(p, modal(gdiamond(1), x)))
        defs.declare("ALLBUT", "mu", disj(p, modal(gbox(1), x)))
        return defs
    agents = sig.agents
    a0 = agents[0]
    defs.declare("AF", "mu", disj(p, modal(box(a0), x)))
    defs.declare("EG", "nu", conj(p, modal(diamond(a0), x)))
    defs.declare("EF", "mu", disj(p, modal(diamond(a0), x)))
    defs.declare("AG", "nu", conj(p, modal(box(a0), x)))
    defs.declare("AU", "mu", disj(p, conj(prop(until_atom), modal(box(a0), x))))
    defs.declare("EU", "mu", disj(p, conj(prop(until_atom), modal(diamond(a0), x))))
    defs.declare("CK", "nu", conj_all(modal(box(a), conj(p, x)) for a in agents))
    return defs


class Parser:
    def __init__(self, text: str, sig: Signature, defs: Optional[Definitions] = None):
        self.text = text
        self.sig = sig
        self.defs = defs if defs is not None else Definitions()
        self.toks = tokenize(text)
        self.i = 0
        self.bound: Optional[str] = None  # name of the fixed point variable in scope
        self.outer: list = []  # enclosing binder names, invisible to nested bodies
        self.param: Optional[str] = None  # parameter name inside a declaration

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.pos, self.text)

    def at(self, kind: str, value: Optional[str] = None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def take(self, kind: str, value: Optional[str] = None) -> Token:
        if not self.at(kind, value):
            want = value or kind
            got = self.tok.value or "end of input"
            raise self.error(f"expected {want!r} but found {got!r}")
        t = self.tok
        self.i += 1
        return t

    def accept(self, kind: str, value: Optional[str] = None) -> bool:
        if self.at(kind, value):
            self.i += 1
            return True
        return False

    # grammar
    def formula(self) -> Formula:
        left = self.disjunction()
        if self.accept("imp"):
            right = self.formula()
            return disj(negate(left), right)
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.accept("or"):
            f = disj(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.accept("and"):
            f = conj(f, self.unary())
        return f

    def unary(self) -> Formula:
        t = self.tok
        if self.accept("punct", "~"):
            return negate(self.unary())
        if t.kind in ("mod", "gmod"):
            self.i += 1
            return modal(self.modality(t), self.unary())
        if t.kind == "ident" and t.value in ("mu", "nu"):
            self.i += 1
            return self.fixpoint(t.value, t)
        return self.postfix()

    def modality(self, t: Token) -> Modality:
        inner = t.value[1:-1].strip()
        is_box = t.value[0] == "["
        if t.kind == "gmod":
            mod = Modality("graded", int(inner.strip("{} ")), is_box)
        else:
            mod = Modality("rel", inner, is_box)
        if not self.sig.accepts(mod):
            raise self.error(f"unknown modality {t.value!r} for logic {self.sig.flag}", t)
        return mod

    def postfix(self) -> Formula:
        f = self.primary()
        if self.at("punct", "^"):
            t = self.take("punct", "^")
            n = int(self.take("num").value)
            if f.op != "mu":
                raise self.error("time-outs attach only to least fixed points", t)
            f = mu(f.fdef, f.arg, n)
        return f

    def primary(self) -> Formula:
        t = self.tok
        if self.accept("punct", "("):
            f = self.formula()
            self.take("punct", ")")
            return f
        if t.kind != "ident":
            raise self.error(f"unexpected {t.value or 'end of input'!r}")
        self.i += 1
        name = t.value
        if name == "true":
            return TOP
        if name == "false":
            return BOT
        if name in KEYWORDS:
            raise self.error(f"unexpected keyword {name!r}", t)
        if self.at("punct", "("):
            return self.application(name, t)
        if name == self.bound:
            return var(X)
        if name in self.outer:
            raise self.error(f"variable {name!r} occurs under a nested binder; "
                             "only flat fixed points are supported", t)
        if name == self.param:
            return var(P)
        if name in self.defs:
            raise self.error(f"operator {name!r} needs an argument", t)
        if not self.sig.has_atom(name):
            raise self.error(f"unknown atom {name!r}", t)
        return prop(name)

    def application(self, name: str, t: Token) -> Formula:
        entry = self.defs.lookup(name)
        if entry is None:
            raise self.error(f"unknown definition {name!r}", t)
        self.take("punct", "(")
        arg = self.formula()
        if self.at("punct", ","):
            raise self.error(f"{name!r} takes exactly one argument")
        self.take("punct", ")")
        if has_vars(arg):
            raise self.error("fixed point arguments must be closed", t)
        kind, fd = entry
        return mu(fd, arg) if kind == "mu" else nu(fd, arg)

    def fixpoint(self, kind: str, t: Token) -> Formula:
        name = self.take("ident").value
        self.take("punct", ".")
        if self.bound is not None:
            self.outer.append(self.bound)
        saved, self.bound = self.bound, name
        try:
            body = self.formula()
        finally:
            self.bound = saved
            if saved is not None:
                self.outer.pop()
        try:
            return abstract_fixpoint(kind, body, self.defs)
        except DefinitionError as e:
            raise self.error(str(e), t) from None

    def declaration(self) -> tuple:
        """``def NAME(p) = mu x . BODY`` -> (name, FixpointDef)."""
        t = self.take("ident", "def")
        name = self.take("ident").value
        self.take("punct", "(")
        param = self.take("ident").value
        if self.at("punct", ","):
            raise self.error("only unary fixed point operators are supported")
        self.take("punct", ")")
        self.take("punct", "=")
        kt = self.tok
        if not (self.at("ident", "mu") or self.at("ident", "nu")):
            raise self.error("expected 'mu' or 'nu'")
        self.i += 1
        bound = self.take("ident").value
        self.take("punct", ".")
        self.bound, self.param = bound, param
        try:
            body = self.formula()
        finally:
            self.bound, self.param = None, None
        if has_fixpoints(body):
            raise self.error("fixed point bodies must not contain fixed points", kt)
        try:
            fd = self.defs.declare(name, kt.value, body)
        except DefinitionError as e:
            raise self.error(str(e), t) from None
        return name, fd

    def end(self) -> None:
        if not self.at("eof"):
            raise self.error(f"unexpected {self.tok.value!r}")


def _match(pattern: Formula, target: Formula, binding: dict) -> bool:
    op = pattern.op
    if op == "var" and pattern.name == P:
        if contains_x(target):
            return False
        bound = binding.get(P)
        if bound is None:
            binding[P] = target
            return True
        return bound is target
    if op == "nvar" and pattern.name == P:
        if contains_x(target):
            return False
        bound = binding.get(P)
        if bound is None:
            binding[P] = negate(target)
            return True
        return negate(bound) is target
    if op != target.op or len(pattern.args) != len(target.args):
        return False
    if not pattern.args:
        return pattern is target
    if op == "mod" and pattern.mod != target.mod:
        return False
    return all(_match(a, b, binding) for a, b in zip(pattern.args, target.args))


def _maximal_closed(f: Formula, out: list) -> None:
    if not contains_x(f):
        if f is not TOP and f is not BOT and f not in out:
            out.append(f)
        return
    for a in f.args:
        _maximal_closed(a, out)


def _replace_all(f: Formula, target: Formula, by: Formula) -> Formula:
    if f is target:
        return by
    if not contains_x(f):
        return f
    if f.op == "and":
        return conj(_replace_all(f.left, target, by), _replace_all(f.right, target, by))
    if f.op == "or":
        return disj(_replace_all(f.left, target, by), _replace_all(f.right, target, by))
    if f.op == "mod":
        return modal(f.mod, _replace_all(f.arg, target, by))
    return f


def abstract_fixpoint(kind: str, body: Formula, defs: Definitions) -> Formula:
    """Turn ``kind x . body`` into an application of a unary flat operator.

    Known operators are matched first (the parameter acts as a pattern
    variable).  Otherwise the x-free part of the body becomes the argument:
    a single distinct maximal x-free subformula, or else the one
    fixpoint-containing part; fixpoint-free bodies stay inline.
    """
    if not contains_x(body):
        raise DefinitionError("fixed point body does not mention its variable")
    make = mu if kind == "mu" else nu
    for fd in defs.known():
        pattern = fd.body if kind == "mu" else fd.dual_body
        binding: dict = {}
        if _match(pattern, body, binding):
            return make(fd, binding.get(P, TOP))
    parts: list = []
    _maximal_closed(body, parts)
    if len(parts) == 1:
        arg = parts[0]
    else:
        heavy = [f for f in parts if has_fixpoints(f)]
        if not heavy:
            arg = None
        elif len(heavy) == 1:
            arg = heavy[0]
        else:
            raise DefinitionError(
                "fixed point body has several fixpoint-containing parameters; "
                "only unary operators are supported")
    if arg is None:
        template, arg = body, TOP
    else:
        template = _replace_all(body, arg, var(P))
    gamma = template if kind == "mu" else dual(template)
    validate_body(gamma)
    fd = FixpointDef(gamma)
    defs.remember(fd)
    return make(fd, arg)


def parse(text: str, sig: Signature, defs: Optional[Definitions] = None) -> Formula:
    """Parse a closed formula; user negation is pushed to the atoms."""
    p = Parser(text, sig, defs)
    f = p.formula()
    p.end()
    return f


def parse_definition(text: str, sig: Signature, defs: Definitions) -> FixpointDef:
    p = Parser(text.strip().rstrip(";"), sig, defs)
    _, fd = p.declaration()
    p.end()
    return fd
