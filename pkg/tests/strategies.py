"""Hypothesis strategies for closed formulas and small models."""
from __future__ import annotations

from hypothesis import strategies as st

from flatmu.formula import (BOT, TOP, Signature, box, conj, diamond, disj, gbox, gdiamond,
                            modal, mu, negate, nprop, nu, prop)
from flatmu.parser import standard_definitions
from flatmu.randgen import graded_suite_definitions

K = Signature.k()
K2 = Signature.kn(("1", "2"))
GRADED = Signature.graded()

_STD = standard_definitions(K)
_GRADED = graded_suite_definitions()


def _fixes(defs):
    return [(kind, fd) for _, (kind, fd) in defs]


def _apply_fix(kf, arg):
    kind, fd = kf
    return mu(fd, arg) if kind == "mu" else nu(fd, arg)


def formulas(sig: Signature = K, atoms=("a", "q"), max_leaves: int = 10):
    """Closed NNF formulas over ``atoms`` with the shipped flat operators."""
    leaves = st.sampled_from([TOP, BOT] + [prop(a) for a in atoms] + [nprop(a) for a in atoms])
    if sig.kind == "graded":
        mods = st.builds(lambda k, b: gbox(k) if b else gdiamond(k),
                         st.integers(0, 2), st.booleans())
        fixes = _fixes(_GRADED)
    else:
        mods = st.builds(lambda a, b: box(a) if b else diamond(a),
                         st.sampled_from(list(sig.agents)), st.booleans())
        fixes = _fixes(_STD) if sig.kind == "k" else []

    def extend(children):
        options = [
            st.builds(conj, children, children),
            st.builds(disj, children, children),
            st.builds(modal, mods, children),
            st.builds(negate, children),
        ]
        if fixes:
            options.append(st.builds(_apply_fix, st.sampled_from(fixes), children))
        return st.one_of(options)

    return st.recursive(leaves, extend, max_leaves=max_leaves)
