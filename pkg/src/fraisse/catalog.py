"""Named classes and their order-property witnesses.

Class expressions used by the CLI::

    pure_sets   LO   MO[k]   H[r]   H[r,k]   Hstar[r]   J[p]
    society[P/2,Q/3]   ordered[<expr>]
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .classes import Builtin, ClassSpec, Forbidden
from .constructions import (
    OrderPropertyWitness,
    chain_witness,
    complete_hypergraph,
    hypergraph_witness,
    order_expansion,
    society_signature,
)
from .structures import RelationSymbol, Signature


class CatalogError(ValueError):
    pass


def pure_sets() -> ClassSpec:
    return ClassSpec(Signature.one_sorted([]), (), "pure_sets")


def multi_order(k: int) -> ClassSpec:
    if k < 1:
        raise CatalogError("MO needs k >= 1")
    names = [f"<{i}" for i in range(k)]
    sig = Signature.one_sorted([(n, 2) for n in names])
    return ClassSpec(sig, tuple(Builtin("linear_order", (n,)) for n in names), "LO" if k == 1 else f"MO[{k}]")


def linear_orders() -> ClassSpec:
    return multi_order(1)


def hypergraphs(r: int) -> ClassSpec:
    if r < 2:
        raise CatalogError("H needs r >= 2")
    return ClassSpec(Signature.one_sorted([("R", r)]), (Builtin("hyperedge", ("R",)),), f"H[{r}]")


def henson(r: int, k: int) -> ClassSpec:
    if k <= r:
        raise CatalogError("H[r,k] needs k > r")
    base = hypergraphs(r)
    return base.with_constraints(Forbidden((complete_hypergraph(r, k),)), name=f"H[{r},{k}]")


def hstar(r: int) -> ClassSpec:
    if r < 2:
        raise CatalogError("Hstar needs r >= 2")
    us = tuple(f"U{i}" for i in range(r))
    sig = Signature.one_sorted([("R", r)] + [(u, 1) for u in us])
    cons = (Builtin("hyperedge", ("R",)), Builtin("partition", us), Builtin("transversal", ("R",) + us))
    return ClassSpec(sig, cons, f"Hstar[{r}]")


def society(spec: str) -> ClassSpec:
    try:
        sig = society_signature(spec)
    except ValueError as e:
        raise CatalogError(str(e)) from None
    cons = tuple(Builtin("hyperedge", (r.name,)) for r in sig.relations)
    return ClassSpec(sig, cons, f"society[{spec}]")


def partite(p: int) -> ClassSpec:
    """J_p: all finite structures with one relation across p+1 sorts."""
    if p < 1:
        raise CatalogError("J needs p >= 1")
    sorts = tuple(f"S{i}" for i in range(p + 1))
    return ClassSpec(Signature(sorts, (RelationSymbol("R", p + 1, sorts),)), (), f"J[{p}]")


def bounded_edges(n: int = 2) -> ClassSpec:
    """Graphs with at most ``n`` edges: closed under substructures but without JEP."""
    return hypergraphs(2).with_constraints(Builtin("max_edges", ("R", n)), name=f"graphs<={n}edges")


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    arity: tuple[int, ...]  # allowed parameter counts
    factory: Callable[..., ClassSpec]
    witness: Callable[..., OrderPropertyWitness] | None
    doc: str


def _mo_witness(k: int) -> OrderPropertyWitness:
    multi_order(k)
    return chain_witness([f"<{i}" for i in range(k)])


def _h_witness(r: int, k: int | None = None) -> OrderPropertyWitness:
    (hypergraphs(r) if k is None else henson(r, k))
    return hypergraph_witness(r)


REGISTRY: dict[str, CatalogEntry] = {
    "pure_sets": CatalogEntry("pure_sets", (0,), pure_sets, None, "finite sets, no relations"),
    "LO": CatalogEntry("LO", (0,), linear_orders, lambda: _mo_witness(1), "finite linear orders"),
    "MO": CatalogEntry("MO", (1,), multi_order, _mo_witness, "k independent linear orders"),
    "H": CatalogEntry("H", (1, 2), lambda r, k=None: hypergraphs(r) if k is None else henson(r, k), _h_witness,
                      "r-uniform hypergraphs, optionally without K_k(r)"),
    "Hstar": CatalogEntry("Hstar", (1,), hstar, None, "r-partite r-hypergraphs with the parts named"),
    "J": CatalogEntry("J", (1,), partite, None, "(p+1)-sorted structures with one (p+1)-ary relation"),
}


# --------------------------------------------------------------- expressions
def _split_top(text: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return [s.strip() for s in out]


def parse_class(expr: str) -> ClassSpec:
    """Resolve a class expression such as ``H[2,3]`` or ``ordered[MO[2]]``."""
    expr = expr.strip()
    m = re.fullmatch(r"([A-Za-z_]+)(?:\[(.*)\])?", expr)
    if not m:
        raise CatalogError(f"bad class expression {expr!r}")
    name, inner = m.group(1), m.group(2)
    if name == "ordered":
        if not inner:
            raise CatalogError("ordered[...] needs a class")
        return order_expansion(parse_class(inner))
    if name == "society":
        if not inner:
            raise CatalogError("society[...] needs a signature such as P/2,Q/3")
        return society(inner)
    params = [] if not inner else _split_top(inner)
    try:
        ints = [int(p) for p in params]
    except ValueError:
        raise CatalogError(f"parameters of {name} must be integers") from None
    return get_class(name, ints)


def get_class(name: str, params: list[int] | tuple[int, ...] = ()) -> ClassSpec:
    if name == "ordered" or name == "society":
        raise CatalogError(f"use parse_class for {name}[...]")
    entry = REGISTRY.get(name)
    if entry is None:
        raise CatalogError(f"unknown class {name!r}; known: {', '.join(sorted(REGISTRY))}, society, ordered")
    if len(params) not in entry.arity:
        raise CatalogError(f"{name} takes {' or '.join(map(str, entry.arity))} parameter(s)")
    return entry.factory(*params)


def op_witness(name: str, params: list[int] | tuple[int, ...] = ()) -> OrderPropertyWitness:
    entry = REGISTRY.get(name)
    if entry is None:
        raise CatalogError(f"unknown class {name!r}")
    if entry.witness is None:
        raise CatalogError(f"no witness registered for {name}")
    if len(params) not in entry.arity:
        raise CatalogError(f"{name} takes {' or '.join(map(str, entry.arity))} parameter(s)")
    return entry.witness(*params)


def witness_for(expr: str) -> OrderPropertyWitness:
    m = re.fullmatch(r"([A-Za-z_]+)(?:\[(.*)\])?", expr.strip())
    if not m or m.group(1) in ("ordered", "society"):
        raise CatalogError(f"no witness registered for {expr}")
    params = [int(p) for p in _split_top(m.group(2))] if m.group(2) else []
    return op_witness(m.group(1), params)
