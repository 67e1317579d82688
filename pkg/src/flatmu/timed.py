"""Timed-out formulas: least fixed points carrying an unfolding budget.

A timed formula is an ordinary :class:`Formula` whose ``mu`` nodes may carry
a finite ``timeout``; ``None`` stands for omega.  At most one distinct
finite-timeout subformula is allowed per formula.
"""
from __future__ import annotations

from typing import Optional

from .formula import BOT, Formula, conj, disj, modal, mu, strip, subformulas, substitute

t_translate = strip

_TAU: dict = {}


def tau(f: Formula) -> Optional[int]:
    """The finite time-out occurring in ``f``, or ``None`` (omega)."""
    r = _TAU.get(f, -1)
    if r != -1:
        return r
    if f.op == "mu" and f.timeout is not None:
        r = f.timeout
    elif f.op in ("and", "or", "mod"):
        r = None
        for a in f.args:
            ta = tau(a)
            if ta is not None:
                r = ta if r is None else min(r, ta)
    else:
        r = None
    _TAU[f] = r
    return r


def focus(f: Formula) -> Optional[Formula]:
    """The finite-timeout ``mu`` subformula of ``f``, if any."""
    if f.op == "mu" and f.timeout is not None:
        return f
    if f.op in ("and", "or", "mod"):
        for a in f.args:
            g = focus(a)
            if g is not None:
                return g
    return None


def timed_leq(a: Formula, b: Formula) -> bool:
    """a is b up to a possible decrease of the time-out."""
    if strip(a) is not strip(b):
        return False
    ta, tb = tau(a), tau(b)
    return tb is None or (ta is not None and ta <= tb)


def is_timed_formula(f: Formula) -> bool:
    """Check the well-formedness conditions on time-outs."""
    finite = set()
    omega = set()
    for g in subformulas(f):
        if g.is_fix:
            if any(h.op == "mu" and h.timeout is not None for h in subformulas(g.arg)):
                return False  # time-outs never sit inside fixed point arguments
        if g.op == "mu":
            (finite if g.timeout is not None else omega).add(g)
    if not finite:
        return True
    if len({strip(g) for g in finite}) != 1 or len(finite) != 1:
        return False
    (psi,) = finite
    if strip(psi) in omega:
        return False
    inside = set(subformulas(psi.arg))
    return all(g in inside for g in omega)


def unfold(f: Formula) -> Formula:
    """gamma(chi, sharp^(k-1)) for ``f = sharp(chi)^k``; plain unfolding otherwise."""
    fd = f.fdef
    if f.op == "mu" and f.timeout is not None:
        if f.timeout == 0:
            raise ValueError("cannot unfold a fixed point with time-out 0")
        return substitute(fd.body, mu(fd, f.arg, f.timeout - 1), f.arg)
    return fd.unfold(f)


def iterate(fd, chi: Formula, i: int) -> Formula:
    """gamma(chi)^i(bot)."""
    g = BOT
    for _ in range(i):
        g = substitute(fd.body, g, chi)
    return g


_S: dict = {}


def s_translate(f: Formula) -> Formula:
    """Replace ``sharp(chi)^i`` by its i-fold unfolding of bottom."""
    r = _S.get(f)
    if r is not None:
        return r
    op = f.op
    if op == "mu" and f.timeout is not None:
        r = iterate(f.fdef, f.arg, f.timeout)
    elif op == "and":
        r = conj(s_translate(f.left), s_translate(f.right))
    elif op == "or":
        r = disj(s_translate(f.left), s_translate(f.right))
    elif op == "mod":
        r = modal(f.mod, s_translate(f.arg))
    else:
        r = f
    _S[f] = r
    return r


def with_timeout(f: Formula, k: Optional[int]) -> Formula:
    return mu(f.fdef, f.arg, k)
