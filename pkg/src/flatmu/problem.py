"""Problem files: a logic, fixed point declarations, and named queries.

::

    logic k;                       # or kn:1,2 / graded
    def AF(p) = mu x . p \\/ [] x;
    query q1: AF(q) /\\ EG(~q);
    expect UNSAT;                  # optional, refers to the previous query

Statements end with ``;`` and ``#`` starts a comment.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .formula import Formula, Signature, to_text
from .parser import Definitions, ParseError, Parser


@dataclass
class Query:
    name: str
    formula: Formula
    expect: Optional[str] = None  # SAT | UNSAT
    pos: int = 0


@dataclass
class ProblemFile:
    sig: Signature
    defs: Definitions = field(default_factory=Definitions)
    queries: list = field(default_factory=list)
    declared: list = field(default_factory=list)  # names in declaration order

    def to_text(self) -> str:
        """Canonical rendering; parses back to the same problem."""
        lines = [f"logic {self.sig.flag};"]
        for name in self.declared:
            kind, fd = self.defs.lookup(name)
            body = fd.body if kind == "mu" else fd.dual_body
            lines.append(f"def {name}(p) = {kind} x . {to_text(body)};")
        for q in self.queries:
            lines.append(f"query {q.name}: {to_text(q.formula)};")
            if q.expect:
                lines.append(f"expect {q.expect};")
        return "\n".join(lines) + "\n"


def _logic(p: Parser) -> Signature:
    t = p.take("ident")
    flag = t.value
    if p.accept("punct", ":"):
        parts = [p.tok.value]
        p.i += 1
        while p.accept("punct", ","):
            parts.append(p.tok.value)
            p.i += 1
        flag += ":" + ",".join(parts)
    try:
        return Signature.from_flag(flag)
    except ValueError as e:
        raise p.error(str(e), t) from None


def parse_problem(text: str, logic: Optional[Signature] = None,
                  defs: Optional[Definitions] = None) -> ProblemFile:
    """Parse a problem file.  ``logic`` is used when the file names none; a
    file naming a different logic is an error."""
    p = Parser(text, logic or Signature.k(), defs)
    prob = ProblemFile(p.sig, p.defs)
    seen_logic = False
    names: set = set()
    while not p.at("eof"):
        t = p.tok
        if p.at("ident", "logic"):
            if seen_logic or prob.queries or prob.declared:
                raise p.error("'logic' must come first and only once")
            p.i += 1
            sig = _logic(p)
            if logic is not None and sig != logic:
                raise p.error(f"file declares logic {sig.flag}, expected {logic.flag}", t)
            p.sig = prob.sig = sig
            seen_logic = True
        elif p.at("ident", "def"):
            name, _ = p.declaration()
            prob.declared.append(name)
        elif p.at("ident", "query"):
            p.i += 1
            name = p.take("ident").value
            if name in names:
                raise p.error(f"duplicate query {name!r}", t)
            names.add(name)
            p.take("punct", ":")
            prob.queries.append(Query(name, p.formula(), pos=t.pos))
        elif p.at("ident", "expect"):
            p.i += 1
            v = p.take("ident")
            if v.value not in ("SAT", "UNSAT"):
                raise p.error("expected SAT or UNSAT", v)
            if not prob.queries or prob.queries[-1].expect is not None:
                raise p.error("'expect' must follow a query", t)
            prob.queries[-1].expect = v.value
        else:
            raise p.error(f"unexpected {t.value!r}")
        p.take("punct", ";")
    return prob


def load_problem(path: str, logic: Optional[Signature] = None) -> ProblemFile:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read(), logic)


__all__ = ["ParseError", "ProblemFile", "Query", "load_problem", "parse_problem"]
