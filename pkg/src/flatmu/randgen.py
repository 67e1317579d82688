"""Seeded random formulas for the cross-checking suites."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .formula import (BOT, P, TOP, X, Formula, Signature, box, conj, diamond, disj,
                      fischer_ladner, gbox, gdiamond, modal, mu, negate, nprop, nu, prop, var)
from .parser import Definitions


@dataclass(frozen=True)
class Shape:
    """Generation bounds: nesting depth, atoms, and a cap on |FL|."""

    depth: int = 3
    atoms: tuple = ("q", "r")
    max_fl: int = 10
    max_grade: int = 2


def k_suite_definitions() -> Definitions:
    """AF, EG, A[r U p] and single-agent common knowledge."""
    x, p = var(X), var(P)
    d = Definitions()
    d.declare("AF", "mu", disj(p, modal(box(), x)))
    d.declare("EG", "nu", conj(p, modal(diamond(), x)))
    d.declare("AU", "mu", disj(p, conj(prop("r"), modal(box(), x))))
    d.declare("CK", "nu", modal(box(), conj(p, x)))
    return d


def graded_suite_definitions(max_grade: int = 2) -> Definitions:
    """sharp(p \\/ <1>x) and sharp(p \\/ [k]x) for k <= max_grade."""
    x, p = var(X), var(P)
    d = Definitions()
    d.declare("TREE", "mu", disj(p, modal(gdiamond(1), x)))
    for k in range(max_grade + 1):
        d.declare(f"ALLBUT{k}", "mu", disj(p, modal(gbox(k), x)))
    return d


class FormulaGenerator:
    def __init__(self, sig: Signature, defs: Definitions, shape: Shape = Shape(), seed: int = 0):
        self.sig, self.defs, self.shape = sig, defs, shape
        self.rng = random.Random(seed)
        self.ops = [(name, kind, fd) for name, (kind, fd) in defs]

    def modality(self):
        rng = self.rng
        if self.sig.kind == "graded":
            k = rng.randint(0, self.shape.max_grade)
            return gbox(k) if rng.random() < 0.5 else gdiamond(k)
        a = rng.choice(self.sig.agents)
        return box(a) if rng.random() < 0.5 else diamond(a)

    def formula(self, depth: Optional[int] = None) -> Formula:
        rng = self.rng
        depth = self.shape.depth if depth is None else depth
        if depth <= 0 or rng.random() < 0.25:
            choice = rng.random()
            if choice < 0.08:
                return TOP if rng.random() < 0.5 else BOT
            a = rng.choice(self.shape.atoms)
            return prop(a) if rng.random() < 0.6 else nprop(a)
        kind = rng.choice(["bool", "bool", "neg", "mod", "fix", "fix"])
        if kind == "bool":
            f, g = self.formula(depth - 1), self.formula(depth - 1)
            return conj(f, g) if rng.random() < 0.5 else disj(f, g)
        if kind == "neg":
            return negate(self.formula(depth - 1))
        if kind == "mod":
            return modal(self.modality(), self.formula(depth - 1))
        name, k, fd = rng.choice(self.ops)
        arg = self.formula(depth - 1)
        return mu(fd, arg) if k == "mu" else nu(fd, arg)

    def bounded(self, tries: int = 10_000) -> Formula:
        """A formula whose closure has at most ``shape.max_fl`` members."""
        for _ in range(tries):
            f = self.formula()
            if len(fischer_ladner(f)) <= self.shape.max_fl:
                return f
        raise RuntimeError("no formula within the closure bound")

    def suite(self, count: int) -> list:
        return [self.bounded() for _ in range(count)]


def k_suite(count: int = 500, seed: int = 0, max_fl: int = 10) -> list:
    sig = Signature.k()
    gen = FormulaGenerator(sig, k_suite_definitions(), Shape(depth=3, max_fl=max_fl), seed)
    return gen.suite(count)


def graded_suite(count: int = 200, seed: int = 0, max_fl: int = 14) -> list:
    sig = Signature.graded()
    gen = FormulaGenerator(sig, graded_suite_definitions(), Shape(depth=3, atoms=("p", "q"),
                                                                  max_fl=max_fl), seed)
    return gen.suite(count)
