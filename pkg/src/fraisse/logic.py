"""Quantifier-free formulas over blocks of tuple variables.

A term ``x<i>.<j>`` names coordinate ``j`` of the ``i``-th block; a formula
with ``blocks`` blocks of width ``width`` is evaluated on an assignment of
``blocks`` tuples of length ``width``.  Assignments hold *global* element ids
(for one-sorted structures these are the plain elements).

Text syntax::

    R(x0.1, x1.0)    x0.0 = x1.1    !phi    phi & psi    phi | psi    ( ... )

``&`` binds tighter than ``|``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence, Union

import numpy as np

from . import kernels
from .structures import Signature, Structure


@dataclass(frozen=True, order=True)
class Term:
    block: int
    coord: int

    def __str__(self) -> str:
        return f"x{self.block}.{self.coord}"


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    arg: "Node"


@dataclass(frozen=True)
class And:
    args: tuple["Node", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Node", ...]


Node = Union[Atom, Eq, Not, And, Or]


class FormulaError(ValueError):
    pass


def node_size(node: Node) -> int:
    if isinstance(node, (Atom, Eq)):
        return 1
    if isinstance(node, Not):
        return 1 + node_size(node.arg)
    return 1 + sum(node_size(a) for a in node.args)


def node_terms(node: Node) -> Iterator[Term]:
    if isinstance(node, Atom):
        yield from node.args
    elif isinstance(node, Eq):
        yield node.left
        yield node.right
    elif isinstance(node, Not):
        yield from node_terms(node.arg)
    else:
        for a in node.args:
            yield from node_terms(a)


def node_text(node: Node) -> str:
    if isinstance(node, Atom):
        return f"{node.rel}({', '.join(map(str, node.args))})"
    if isinstance(node, Eq):
        return f"{node.left} = {node.right}"
    if isinstance(node, Not):
        inner = node_text(node.arg)
        return f"!{inner}" if isinstance(node.arg, (Atom, Not)) else f"!({inner})"
    sep = " & " if isinstance(node, And) else " | "
    return sep.join(
        f"({node_text(a)})" if isinstance(a, (And, Or, Eq)) else node_text(a) for a in node.args
    )


@dataclass(frozen=True)
class QFFormula:
    root: Node
    blocks: int
    width: int

    def __post_init__(self):
        if self.blocks < 0 or self.width < 1:
            raise FormulaError("blocks >= 0 and width >= 1 required")
        for t in node_terms(self.root):
            if not (0 <= t.block < self.blocks and 0 <= t.coord < self.width):
                raise FormulaError(f"term {t} outside {self.blocks} blocks of width {self.width}")

    @property
    def size(self) -> int:
        return node_size(self.root)

    def __str__(self) -> str:
        return node_text(self.root)

    def terms(self) -> set[Term]:
        return set(node_terms(self.root))

    def check(self, sig: Signature) -> dict[Term, int]:
        """Validate against ``sig``; returns the sort index forced on each term."""
        sorts: dict[Term, int] = {}

        def visit(n: Node):
            if isinstance(n, Atom):
                try:
                    prof = sig.profiles[sig.index(n.rel)]
                except KeyError:
                    raise FormulaError(f"unknown relation {n.rel!r}") from None
                if len(n.args) != len(prof):
                    raise FormulaError(f"{n.rel} expects {len(prof)} arguments")
                for t, s in zip(n.args, prof):
                    if sorts.setdefault(t, s) != s:
                        raise FormulaError(f"term {t} used at two sorts")
            elif isinstance(n, Not):
                visit(n.arg)
            elif isinstance(n, (And, Or)):
                for a in n.args:
                    visit(a)

        visit(self.root)

        def visit_eq(n: Node):
            if isinstance(n, Eq):
                a, b = sorts.get(n.left), sorts.get(n.right)
                if a is not None and b is not None and a != b:
                    raise FormulaError(f"equality {n.left} = {n.right} across sorts")
            elif isinstance(n, Not):
                visit_eq(n.arg)
            elif isinstance(n, (And, Or)):
                for a in n.args:
                    visit_eq(a)

        visit_eq(self.root)
        return sorts

    def evaluate(self, S: Structure, assignment: Sequence[Sequence[int]]) -> bool:
        return evaluate(self, S, assignment)


# ------------------------------------------------------------- evaluation
def _eval(node: Node, S: Structure, flat: Sequence[int], width: int) -> bool:
    if isinstance(node, Atom):
        t = tuple(flat[a.block * width + a.coord] for a in node.args)
        return t in S.global_relations[S.signature.index(node.rel)]
    if isinstance(node, Eq):
        l, r = node.left, node.right
        return flat[l.block * width + l.coord] == flat[r.block * width + r.coord]
    if isinstance(node, Not):
        return not _eval(node.arg, S, flat, width)
    if isinstance(node, And):
        return all(_eval(a, S, flat, width) for a in node.args)
    return any(_eval(a, S, flat, width) for a in node.args)


def evaluate(phi: QFFormula, S: Structure, assignment: Sequence[Sequence[int]]) -> bool:
    """Truth of ``phi`` in ``S`` under ``assignment`` (one tuple per block)."""
    if len(assignment) != phi.blocks or any(len(b) != phi.width for b in assignment):
        raise FormulaError(f"assignment must be {phi.blocks} blocks of width {phi.width}")
    sorts = phi.check(S.signature)
    flat = [int(x) for b in assignment for x in b]
    for x in flat:
        if not 0 <= x < S.size:
            raise FormulaError(f"element {x} not in structure")
    for t, s in sorts.items():
        if S.sort_of[flat[t.block * phi.width + t.coord]] != s:
            raise FormulaError(f"term {t} assigned an element of the wrong sort")
    return _eval(phi.root, S, flat, phi.width)


def eval_flat(phi: QFFormula, S: Structure, flat: Sequence[int]) -> bool:
    """Unchecked evaluation on a flat assignment (block-major)."""
    return _eval(phi.root, S, flat, phi.width)


class CompiledFormula:
    """Postfix program for :func:`kernels.eval_program`."""

    def __init__(self, phi: QFFormula, sig: Signature):
        phi.check(sig)
        self.phi = phi
        self.sig = sig
        maxar = max(sig.max_arity, 2)
        rows: list[list[int]] = []

        def emit(n: Node):
            w = phi.width
            if isinstance(n, Atom):
                rows.append([kernels.OP_ATOM, sig.index(n.rel)] + [a.block * w + a.coord for a in n.args])
            elif isinstance(n, Eq):
                rows.append([kernels.OP_EQ, n.left.block * w + n.left.coord, n.right.block * w + n.right.coord])
            elif isinstance(n, Not):
                emit(n.arg)
                rows.append([kernels.OP_NOT])
            else:
                for a in n.args:
                    emit(a)
                rows.append([kernels.OP_AND if isinstance(n, And) else kernels.OP_OR, len(n.args)])

        emit(phi.root)
        prog = np.zeros((len(rows), 2 + maxar), dtype=np.int64)
        for i, r in enumerate(rows):
            prog[i, : len(r)] = r
        self.program = prog

    def run(self, S: Structure, flat_assignments: np.ndarray, use_numba=None) -> np.ndarray:
        packed = pack_structure(S)
        return kernels.eval_program(self.program, *packed, flat_assignments, use_numba=use_numba).astype(bool)


def pack_structure(S: Structure):
    """Dense relation data in the layout :func:`kernels.eval_program` expects."""
    cached = S.__dict__.get("_packed")
    if cached is not None:
        return cached
    sig = S.signature
    maxar = max(sig.max_arity, 1)
    nrel = len(sig.relations)
    arity = np.array([r.arity for r in sig.relations], dtype=np.int64)
    strides = np.zeros((max(nrel, 1), maxar), dtype=np.int64)
    shifts = np.zeros_like(strides)
    dims = np.zeros_like(strides)
    chunks, offsets, pos = [], [], 0
    for j, prof in enumerate(sig.profiles):
        arr = S.dense(j)
        chunks.append(arr.ravel())
        offsets.append(pos)
        pos += arr.size
        st = np.array(arr.strides, dtype=np.int64) // max(arr.itemsize, 1) if arr.ndim else []
        for p, s in enumerate(prof):
            strides[j, p] = st[p]
            shifts[j, p] = S.offsets[s]
            dims[j, p] = S.sizes[s]
    data = np.concatenate(chunks + [np.zeros(1, np.uint8)]) if chunks else np.zeros(1, np.uint8)
    packed = (arity, data, np.array(offsets + [0], dtype=np.int64), strides, shifts, dims)
    S.__dict__["_packed"] = packed
    return packed


# ----------------------------------------------------------------- parsing
_TOKEN = re.compile(
    r"\s*(?:(?P<term>x(?P<b>\d+)\.(?P<c>\d+))|(?P<name>[A-Za-z_<>][A-Za-z0-9_<>']*)|(?P<op>[!&|=(),]))"
)


def _tokenize(text: str) -> list[tuple[str, object]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        if m.group("term"):
            out.append(("term", Term(int(m.group("b")), int(m.group("c")))))
        elif m.group("name"):
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eof", None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            raise FormulaError(f"expected {value or kind}, got {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self) -> Node:
        node = self.disj()
        if self.peek()[0] != "eof":
            raise FormulaError(f"trailing input at token {self.peek()[1]!r}")
        return node

    def disj(self) -> Node:
        args = [self.conj()]
        while self.peek() == ("op", "|"):
            self.take()
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conj(self) -> Node:
        args = [self.unary()]
        while self.peek() == ("op", "&"):
            self.take()
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self) -> Node:
        kind, val = self.peek()
        if (kind, val) == ("op", "!"):
            self.take()
            return Not(self.unary())
        if (kind, val) == ("op", "("):
            self.take()
            node = self.disj()
            self.take("op", ")")
            return node
        if kind == "term":
            self.take()
            self.take("op", "=")
            right = self.take("term")[1]
            return Eq(val, right)
        if kind == "name":
            self.take()
            self.take("op", "(")
            args = [self.take("term")[1]]
            while self.peek() == ("op", ","):
                self.take()
                args.append(self.take("term")[1])
            self.take("op", ")")
            return Atom(val, tuple(args))
        raise FormulaError(f"unexpected token {val!r}")


def parse_formula(text: str, blocks: int | None = None, width: int | None = None) -> QFFormula:
    """Parse formula text; block count/width default to the largest indices used."""
    root = _Parser(text).parse()
    terms = list(node_terms(root))
    if blocks is None:
        blocks = max((t.block for t in terms), default=-1) + 1
    if width is None:
        width = max((t.coord for t in terms), default=0) + 1
    return QFFormula(root, blocks, width)


# ------------------------------------------------------------- enumeration
def _key(node: Node, rel_order: dict[str, int]) -> tuple:
    if isinstance(node, Atom):
        return (1, 0, rel_order[node.rel], node.args)
    if isinstance(node, Eq):
        return (1, 1, 0, (node.left, node.right))
    if isinstance(node, Not):
        return (node_size(node), 2, _key(node.arg, rel_order))
    kind = 3 if isinstance(node, And) else 4
    return (node_size(node), kind, tuple(_key(a, rel_order) for a in node.args))


def normalize(node: Node, sig: Signature) -> Node:
    """Negation normal form, flattened and child-sorted And/Or."""
    order = {n: i for i, n in enumerate(sig.names())}

    def nnf(n: Node, neg: bool) -> Node:
        if isinstance(n, (Atom, Eq)):
            if isinstance(n, Eq) and n.right < n.left:
                n = Eq(n.right, n.left)
            return Not(n) if neg else n
        if isinstance(n, Not):
            return nnf(n.arg, not neg)
        flip = isinstance(n, And) == neg  # And under negation becomes Or
        cls = Or if flip else And
        kids: list[Node] = []
        for a in n.args:
            k = nnf(a, neg)
            kids.extend(k.args if isinstance(k, cls) else [k])
        uniq = {_key(k, order): k for k in kids}
        kids = [uniq[k] for k in sorted(uniq)]
        return kids[0] if len(kids) == 1 else cls(tuple(kids))

    return nnf(node, False)


def literals(sig: Signature, blocks: int, width: int) -> list[Node]:
    """Positive literals in canonical order: relation atoms, then equalities."""
    if not sig.is_one_sorted:
        raise FormulaError("formula enumeration supports one-sorted signatures only")
    terms = [Term(b, c) for b in range(blocks) for c in range(width)]
    out: list[Node] = []
    for r in sig.relations:
        out += [Atom(r.name, args) for args in itertools.product(terms, repeat=r.arity)]
    out += [Eq(a, b) for a, b in itertools.combinations(terms, 2)]
    return out


def enumerate_formulas(sig: Signature, blocks: int, width: int, max_nodes: int) -> Iterator[QFFormula]:
    """Every normal-form formula with at most ``max_nodes`` nodes, once each.

    Normal form: negations only on literals, And/Or with at least two distinct
    children sorted by a fixed key and never directly nested in themselves,
    equalities between distinct terms written in increasing order.  Order:
    by node count, then key.
    """
    if max_nodes < 1:
        raise ValueError("max_nodes must be >= 1")
    order = {n: i for i, n in enumerate(sig.names())}
    by_size: dict[int, list[Node]] = {1: literals(sig, blocks, width)}
    by_size[2] = [Not(l) for l in by_size[1]]
    for s in range(3, max_nodes + 1):
        found: list[Node] = []
        pool = [n for t in range(1, s - 1) for n in by_size.get(t, [])]
        pool.sort(key=lambda n: _key(n, order))
        for cls in (And, Or):
            cand = [n for n in pool if not isinstance(n, cls)]

            def rec(start: int, budget: int, chosen: list[Node]):
                if budget == 0 and len(chosen) >= 2:
                    found.append(cls(tuple(chosen)))
                    return
                for i in range(start, len(cand)):
                    sz = node_size(cand[i])
                    if sz <= budget:
                        chosen.append(cand[i])
                        rec(i + 1, budget - sz, chosen)
                        chosen.pop()

            rec(0, s - 1, [])
        found.sort(key=lambda n: _key(n, order))
        by_size[s] = found
    for s in range(1, max_nodes + 1):
        for node in by_size.get(s, []):
            yield QFFormula(node, blocks, width)
