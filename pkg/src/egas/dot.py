"""Graphviz DOT text for abstract transition systems, lattices and domains."""

from __future__ import annotations

from typing import Iterable

from .absdom import AbstractDomain
from .ats import AbstractTransitionSystem
from .lattice import FiniteLattice


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', r"\"") + '"'


def ats_dot(ats: AbstractTransitionSystem, name: str = "ats") -> str:
    """One node per block (ordered by least member state), one arrow per
    existential edge.  Init blocks are doubled, error blocks drawn red."""
    init, error = ats.init_blocks(), ats.error_blocks()
    out = [f"digraph {_q(name)} {{", "  rankdir=LR;", "  node [shape=box];"]
    for i in range(len(ats.partition)):
        attrs = [f"label={_q(ats.block_name(i))}"]
        if i in init:
            attrs.append("peripheries=2")
        if i in error:
            attrs.append("color=red")
        out.append(f"  b{i} [{', '.join(attrs)}];")
    for a, b in sorted(ats.edges):
        out.append(f"  b{a} -> b{b};")
    out.append("}")
    return "\n".join(out) + "\n"


def lattice_dot(
    lat: FiniteLattice,
    marked: Iterable[int] = (),
    removed: Iterable[int] = (),
    name: str = "lattice",
) -> str:
    """Hasse diagram, bottom at the bottom.  ``marked`` elements are filled,
    ``removed`` ones dashed."""
    marked, removed = frozenset(marked), frozenset(removed)
    out = [f"digraph {_q(name)} {{", "  rankdir=BT;", "  node [shape=ellipse];"]
    for x in lat.elements():
        attrs = [f"label={_q(lat.name(x))}"]
        if x in marked:
            attrs.append("style=filled, fillcolor=lightblue")
        if x in removed:
            attrs.append("style=dashed")
        out.append(f"  e{x} [{', '.join(attrs)}];")
    for a, b in sorted(lat.covers()):
        out.append(f"  e{a} -> e{b} [arrowhead=none];")
    out.append("}")
    return "\n".join(out) + "\n"


def domain_dot(domain: AbstractDomain, kernel: AbstractDomain | None = None) -> str:
    removed = domain.image - kernel.image if kernel is not None else ()
    keep = kernel.image if kernel is not None else domain.image
    return lattice_dot(domain.carrier, keep, removed, domain.name)


def emit_dot(obj) -> str:
    if isinstance(obj, AbstractTransitionSystem):
        return ats_dot(obj)
    if isinstance(obj, AbstractDomain):
        return domain_dot(obj)
    if isinstance(obj, FiniteLattice):
        return lattice_dot(obj)
    raise TypeError(f"no DOT rendering for {type(obj).__name__}")
