"""Interpretation witnesses and the explicit encodings between classes.

An :class:`Interpretation` of width ``m`` from signature L1 into L2 assigns
to each relation ``R`` of L1 (arity r) a quantifier-free L2-formula over r
blocks of width m.  A witness for a source structure B is a target structure
C together with an injection ``u: B -> C^m`` such that

    B |= R(b_0, .., b_{r-1})   <=>   C |= theta_R(u(b_0), .., u(b_{r-1}))

for every relation and every tuple, repeating tuples included.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .classes import Builtin, ClassSpec, _check_builtin, enumerate_members, is_member, one_point_extensions
from .logic import (
    And,
    Atom,
    CompiledFormula,
    Eq,
    FormulaError,
    Node,
    Not,
    Or,
    QFFormula,
    Term,
    enumerate_formulas,
    eval_flat,
    node_terms,
    parse_formula,
)
from .structures import (
    RelationSymbol,
    Signature,
    SignatureMismatch,
    Structure,
    disjoint_union,
    empty_structure,
    qf_type,
    reduct,
)


# ------------------------------------------------------------ interpretations
@dataclass(frozen=True)
class Interpretation:
    source: Signature
    target: Signature
    m: int
    thetas: tuple[tuple[str, QFFormula], ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("block width must be >= 1")
        names = [n for n, _ in self.thetas]
        if sorted(names) != sorted(self.source.names()) or len(set(names)) != len(names):
            raise ValueError("exactly one theta per source relation required")
        for name, th in self.thetas:
            r = self.source.relation(name)
            if th.blocks != r.arity or th.width != self.m:
                raise ValueError(f"theta for {name} must have {r.arity} blocks of width {self.m}")
            th.check(self.target)

    @classmethod
    def make(cls, source: Signature, target: Signature, m: int, thetas: Mapping[str, QFFormula | str]):
        out = []
        for r in source.relations:
            th = thetas[r.name]
            if isinstance(th, str):
                th = parse_formula(th, r.arity, m)
            out.append((r.name, th))
        return cls(source, target, m, tuple(out))

    def theta(self, name: str) -> QFFormula:
        return dict(self.thetas)[name]

    def __str__(self) -> str:
        return "; ".join(f"{n}: {th}" for n, th in self.thetas)


def identity_interpretation(sig: Signature) -> Interpretation:
    thetas = {
        r.name: QFFormula(Atom(r.name, tuple(Term(i, 0) for i in range(r.arity))), r.arity, 1)
        for r in sig.relations
    }
    return Interpretation.make(sig, sig, 1, thetas)


def _check_map(interp: Interpretation, B: Structure, C: Structure, u) -> np.ndarray:
    if B.signature != interp.source or C.signature != interp.target:
        raise SignatureMismatch("structures do not match the interpretation's signatures")
    if len(u) != B.size:
        raise ValueError("u must give one tuple per source element")
    arr = np.array([tuple(t) for t in u], dtype=np.int64).reshape(B.size, -1) if B.size else np.zeros((0, interp.m), np.int64)
    if arr.shape[1] != interp.m:
        raise ValueError(f"u must map into {interp.m}-tuples")
    if len({tuple(r) for r in arr.tolist()}) != B.size:
        raise ValueError("u is not injective")
    if arr.size and (arr.min() < 0 or arr.max() >= C.size):
        raise ValueError("u leaves the target universe")
    return arr


def verify_witness(interp: Interpretation, B: Structure, C: Structure, u, use_numba=None) -> bool:
    """Exhaustive tuple-by-tuple check of the witness biconditional."""
    arr = _check_map(interp, B, C, u)
    for j, r in enumerate(B.signature.relations):
        th = interp.theta(r.name)
        pools = [range(B.offsets[s], B.offsets[s] + B.sizes[s]) for s in B.signature.profiles[j]]
        tuples = list(itertools.product(*pools))
        if not tuples:
            continue
        idx = np.array(tuples, dtype=np.int64)
        flat = arr[idx].reshape(len(tuples), -1)
        got = CompiledFormula(th, C.signature).run(C, flat, use_numba=use_numba)
        want = np.array([t in B.global_relations[j] for t in tuples])
        if not np.array_equal(got, want):
            return False
    return True


@dataclass
class EncodingResult:
    source: Structure
    target: Structure
    u: tuple[tuple[int, ...], ...]
    interp: Interpretation

    def verify(self, use_numba=None) -> bool:
        return verify_witness(self.interp, self.source, self.target, self.u, use_numba)


# ---------------------------------------------------------------- composition
def _substitute(node: Node, outer: Interpretation, m1: int) -> Node:
    """Replace every L2-literal of ``node`` (width m1) by its translation into L3."""
    m2 = outer.m
    if isinstance(node, Atom):
        th = outer.theta(node.rel)
        # block p of th is the m2-block standing for the term node.args[p]
        args = node.args

        def sub(n: Node) -> Node:
            if isinstance(n, Atom):
                return Atom(n.rel, tuple(Term(args[t.block].block, args[t.block].coord * m2 + t.coord) for t in n.args))
            if isinstance(n, Eq):
                l, r = n.left, n.right
                return Eq(
                    Term(args[l.block].block, args[l.block].coord * m2 + l.coord),
                    Term(args[r.block].block, args[r.block].coord * m2 + r.coord),
                )
            if isinstance(n, Not):
                return Not(sub(n.arg))
            return type(n)(tuple(sub(a) for a in n.args))

        return sub(th.root)
    if isinstance(node, Eq):
        l, r = node.left, node.right
        eqs = tuple(Eq(Term(l.block, l.coord * m2 + j), Term(r.block, r.coord * m2 + j)) for j in range(m2))
        return eqs[0] if m2 == 1 else And(eqs)
    if isinstance(node, Not):
        return Not(_substitute(node.arg, outer, m1))
    return type(node)(tuple(_substitute(a, outer, m1) for a in node.args))


def compose(first: Interpretation, second: Interpretation) -> Interpretation:
    """Interpretation L1 -> L3 of width ``m1 * m2`` from L1 -> L2 and L2 -> L3."""
    if first.target != second.source:
        raise SignatureMismatch("interpretations do not chain")
    m = first.m * second.m
    thetas = {
        name: QFFormula(_substitute(th.root, second, first.m), th.blocks, m) for name, th in first.thetas
    }
    return Interpretation.make(first.source, second.target, m, thetas)


def compose_maps(u1: Sequence[Sequence[int]], u2: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(x for c in t for x in u2[c]) for t in u1)


def compose_results(first: EncodingResult, second: EncodingResult) -> EncodingResult:
    if first.target != second.source:
        raise ValueError("results do not chain")
    return EncodingResult(
        first.source, second.target, compose_maps(first.u, second.u), compose(first.interp, second.interp)
    )


# ---------------------------------------------------------------- hypergraphs
def _hyper_sig(r: int, name: str = "R") -> Signature:
    return Signature.one_sorted([(name, r)])


def _is_hypergraph(B: Structure) -> bool:
    sig = B.signature
    return (
        sig.is_one_sorted
        and len(sig.relations) == 1
        and sig.relations[0].arity >= 2
        and _check_builtin(Builtin("hyperedge", (sig.relations[0].name,)), B)
    )


def _sym(tuples) -> frozenset:
    return frozenset(p for t in tuples for p in itertools.permutations(t))


def lift_arity(B: Structure, r2: int) -> EncodingResult:
    """Encode an r1-hypergraph in an r2-hypergraph by padding every edge with fixed new points."""
    if not _is_hypergraph(B):
        raise ValueError("source must be a hypergraph")
    r1 = B.signature.relations[0].arity
    if r2 <= r1:
        raise ValueError("target arity must exceed the source arity")
    name = B.signature.relations[0].name
    n, d = B.size, r2 - r1
    c = tuple(range(n, n + d))
    target = Structure(_hyper_sig(r2, name), (n + d,), (_sym(t + c for t in B.relations[0]),))
    u = tuple((b,) + c for b in range(n))
    args = [Term(i, 0) for i in range(r1)] + [Term(0, j) for j in range(1, d + 1)]
    theta = QFFormula(Atom(name, tuple(args)), r1, d + 1)
    interp = Interpretation(B.signature, target.signature, d + 1, ((name, theta),))
    return EncodingResult(B, target, u, interp)


def complete_hypergraph(r: int, k: int, name: str = "R") -> Structure:
    return Structure(_hyper_sig(r, name), (k,), (frozenset(itertools.permutations(range(k), r)),))


def contains_clique(S: Structure, k: int, rel: str | None = None) -> bool:
    """Is there a k-set all of whose r-subsets are edges?  (exhaustive over k-subsets)"""
    R = S.rel(rel or S.signature.relations[0].name)
    r = S.signature.relation(rel or S.signature.relations[0].name).arity
    for X in itertools.combinations(range(S.size), k):
        if all(t in R for t in itertools.combinations(X, r)):
            return True
    return False


def remove_cliques(B: Structure, k: int) -> EncodingResult:
    """Encode an r-hypergraph in a K_k(r)-free one on ``B x {0..k-2}``."""
    if not _is_hypergraph(B):
        raise ValueError("source must be a hypergraph")
    r = B.signature.relations[0].arity
    if k <= r:
        raise ValueError("clique size must exceed the arity")
    name = B.signature.relations[0].name
    w = k - 1
    R = {
        tuple(b * w + i for b, i in zip(t, lv))
        for t in B.relations[0]
        for lv in itertools.permutations(range(w), r)
    }
    target = Structure(B.signature, (B.size * w,), (frozenset(R),))
    u = tuple(tuple(b * w + i for i in range(w)) for b in range(B.size))
    conj = tuple(
        Atom(name, tuple(Term(j, s[j]) for j in range(r))) for s in itertools.permutations(range(w), r)
    )
    theta = QFFormula(conj[0] if len(conj) == 1 else And(conj), r, w)
    interp = Interpretation(B.signature, B.signature, w, ((name, theta),))
    return EncodingResult(B, target, u, interp)


# ------------------------------------------------------------------ societies
def society_signature(spec: str, sort: str = "V") -> Signature:
    """Parse ``"P/2,Q/3"`` into a one-sorted signature."""
    rels = []
    for part in filter(None, (p.strip() for p in spec.split(","))):
        m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)/(\d+)", part)
        if not m:
            raise ValueError(f"bad society relation {part!r}; expected NAME/ARITY")
        rels.append((m.group(1), int(m.group(2))))
    if not rels:
        raise ValueError("a society signature needs at least one relation")
    if any(a < 2 for _, a in rels):
        raise ValueError("society relations must have arity >= 2")
    return Signature.one_sorted(rels, sort)


def is_society(C: Structure) -> bool:
    sig = C.signature
    return (
        sig.is_one_sorted
        and bool(sig.relations)
        and all(r.arity >= 2 for r in sig.relations)
        and all(_check_builtin(Builtin("hyperedge", (r.name,)), C) for r in sig.relations)
    )


def society_blocks(sig: Signature) -> tuple[int, int, dict[str, tuple[tuple[int, ...], tuple[int, ...]]]]:
    """``(m, r, {Q: (I_Q, complement of I_Q)})``: consecutive blocks in signature order."""
    m = sum(r.arity for r in sig.relations)
    r = sig.max_arity
    parts, pos = {}, 0
    for rel in sig.relations:
        I = tuple(range(pos, pos + rel.arity))
        J = tuple(i for i in range(m) if i not in I)
        parts[rel.name] = (I, J)
        pos += rel.arity
    return m, r, parts


def encode_society(C: Structure, target_name: str = "R") -> EncodingResult:
    """Encode a society in the r-hypergraphs, r the largest arity, on ``C x m``."""
    if not is_society(C):
        raise ValueError("input is not a society")
    m, r, parts = society_blocks(C.signature)
    R = set()
    thetas = []
    for rel, tuples in zip(C.signature.relations, C.relations):
        n = rel.arity
        I, J = parts[rel.name]
        for t in tuples:
            R.add(tuple(t[i] * m + I[i] for i in range(n)) + tuple(t[0] * m + J[j] for j in range(r - n)))
        args = tuple(Term(i, I[i]) for i in range(n)) + tuple(Term(0, J[j]) for j in range(r - n))
        thetas.append((rel.name, QFFormula(Atom(target_name, args), n, m)))
    target = Structure(_hyper_sig(r, target_name), (C.size * m,), (_sym(R),))
    u = tuple(tuple(c * m + i for i in range(m)) for c in range(C.size))
    return EncodingResult(C, target, u, Interpretation(C.signature, target.signature, m, tuple(thetas)))


# ------------------------------------------------------------- order property
@dataclass(frozen=True)
class OrderPropertyWitness:
    """``psi(x; y)`` on two m-blocks with a generator of ordered configurations.

    ``generator(n)`` returns ``(A, tuples)`` with ``A |= psi(a_i; a_j) <=> i < j``.
    """

    name: str
    m: int
    psi: QFFormula
    generator: Callable[[int], tuple[Structure, list[tuple[int, ...]]]] = field(compare=False)

    def check(self, A: Structure, tuples: Sequence[Sequence[int]]) -> bool:
        if len({tuple(t) for t in tuples}) != len(tuples):
            return False
        for i, a in enumerate(tuples):
            for j, b in enumerate(tuples):
                if eval_flat(self.psi, A, tuple(a) + tuple(b)) != (i < j):
                    return False
        return True

    def verify(self, n: int) -> bool:
        A, tuples = self.generator(n)
        return len(tuples) == n and self.check(A, tuples)


def half_hypergraph(r: int, n: int, name: str = "R") -> tuple[Structure, list[tuple[int, ...]]]:
    """Points ``a_i`` (ids ``i*r``) and ``c_{i,1..r-1}``; edges ``{a_i} + c_j`` for ``i < j``."""
    R = set()
    for i in range(n):
        for j in range(i + 1, n):
            R.add((i * r,) + tuple(j * r + t for t in range(1, r)))
    S = Structure(_hyper_sig(r, name), (n * r,), (_sym(R),))
    return S, [tuple(i * r + t for t in range(r)) for i in range(n)]


def chain(n: int, names: Sequence[str] = ("<0",)) -> Structure:
    """The n-element chain, one copy of the same order per relation name."""
    lt = frozenset((i, j) for i in range(n) for j in range(i + 1, n))
    return Structure(Signature.one_sorted([(x, 2) for x in names]), (n,), tuple(lt for _ in names))


def hypergraph_witness(r: int, name: str = "R") -> OrderPropertyWitness:
    psi = QFFormula(Atom(name, (Term(0, 0),) + tuple(Term(1, t) for t in range(1, r))), 2, r)
    return OrderPropertyWitness(f"H[{r}]", r, psi, lambda n: half_hypergraph(r, n, name))


def chain_witness(names: Sequence[str] = ("<0",)) -> OrderPropertyWitness:
    psi = QFFormula(Atom(names[0], (Term(0, 0), Term(1, 0))), 2, 1)
    names = tuple(names)
    return OrderPropertyWitness("chain", 1, psi, lambda n: (chain(n, names), [(i,) for i in range(n)]))


def _shift_terms(node: Node, by: int) -> Node:
    if isinstance(node, Atom):
        return Atom(node.rel, tuple(Term(t.block, t.coord + by) for t in node.args))
    if isinstance(node, Eq):
        return Eq(Term(node.left.block, node.left.coord + by), Term(node.right.block, node.right.coord + by))
    if isinstance(node, Not):
        return Not(_shift_terms(node.arg, by))
    return type(node)(tuple(_shift_terms(a, by) for a in node.args))


def order_relation(B: Structure, K: ClassSpec) -> str:
    extra = [n for n in B.signature.names() if n not in K.signature.names()]
    if len(extra) != 1:
        raise SignatureMismatch("source must expand the class signature by exactly one relation")
    return extra[0]


def code_order(B: Structure, K: ClassSpec, w: OrderPropertyWitness) -> EncodingResult:
    """Encode an ordered member of K back into K.

    The order is carried by a witness configuration ``a_0, .., a_{n-1}``
    listed along the order of B; the K-part is carried by a disjoint copy of
    B without its order.  ``f(b_i) = (b_i, a_i)``.
    """
    lt = order_relation(B, K)
    n = B.size
    ranks = sorted(range(n), key=lambda x: sum((y, x) in B.rel(lt) for y in range(n)))
    W, aa = w.generator(n)
    if not w.check(W, aa) or len(aa) != n:
        raise ValueError("order-property witness fails its biconditional")
    if W.signature != K.signature:
        raise SignatureMismatch("witness configuration is not over the class signature")
    base = reduct(B, K.signature)
    C = disjoint_union(base, W)
    if not is_member(K, C):
        raise ValueError("disjoint union left the class")
    f = [None] * n
    for i, b in enumerate(ranks):
        f[b] = (b,) + tuple(n + x for x in aa[i])
    m = 1 + w.m
    thetas = {lt: QFFormula(_shift_terms(w.psi.root, 1), 2, m)}
    for rel in K.signature.relations:
        thetas[rel.name] = QFFormula(Atom(rel.name, tuple(Term(i, 0) for i in range(rel.arity))), rel.arity, m)
    interp = Interpretation.make(B.signature, K.signature, m, thetas)
    return EncodingResult(B, C, tuple(f), interp)


def order_expansion(K: ClassSpec, name: str | None = None) -> ClassSpec:
    """Expand K by a fresh binary relation required to be a linear order.

    The default name continues a ``<0, <1, ..`` family when every relation of
    K belongs to one (so LO expands to MO_2), and is ``<`` otherwise.
    """
    sig = K.signature
    if not sig.is_one_sorted:
        raise ValueError("order expansion needs a one-sorted class")
    if name is None:
        nums = [re.fullmatch(r"<(\d+)", n) for n in sig.names()]
        name = f"<{len(nums)}" if all(nums) else "<"
    if name in sig.names():
        raise ValueError(f"relation name {name!r} already in use")
    new_sig = sig.extend(RelationSymbol(name, 2, (sig.sorts[0],) * 2))
    return ClassSpec(new_sig, K.constraints + (Builtin("linear_order", (name,)),), f"{K.name}^<", K.hereditary)


# ------------------------------------------------------------------- products
def product_structure(Bs: Sequence[Structure]) -> Structure:
    """Cartesian product; a factor's relation holds iff it holds on that coordinate.

    Elements are numbered lexicographically (first factor most significant).
    """
    if not Bs:
        raise ValueError("need at least one factor")
    names: list[str] = []
    for B in Bs:
        if not B.signature.is_one_sorted:
            raise ValueError("product factors must be one-sorted")
        names += B.signature.names()
    if len(set(names)) != len(names):
        raise SignatureMismatch("factor signatures share relation names")
    sort = Bs[0].signature.sorts[0]
    sig = Signature.one_sorted([(r.name, r.arity) for B in Bs for r in B.signature.relations], sort)
    sizes = [B.size for B in Bs]
    elems = list(itertools.product(*(range(n) for n in sizes)))
    index = {e: i for i, e in enumerate(elems)}
    rels = []
    for k, B in enumerate(Bs):
        for r, tuples in zip(B.signature.relations, B.relations):
            out = set()
            for t in itertools.product(elems, repeat=r.arity):
                if tuple(e[k] for e in t) in tuples:
                    out.add(tuple(index[e] for e in t))
            rels.append(frozenset(out))
    return Structure(sig, (len(elems),), tuple(rels))


def product_coordinates(Bs: Sequence[Structure]) -> list[tuple[int, ...]]:
    return list(itertools.product(*(range(B.size) for B in Bs)))


# ------------------------------------------------------------ one-sort reduction
@dataclass
class OneSortResult:
    A: Structure
    types: tuple  # type table, index q -> qf type of a distinct tuple
    u: tuple[tuple[int, ...], ...]  # per sort, local element -> element of A
    source_signature: Signature


def realized_types(B: Structure, arity: int | None = None) -> list:
    """Quantifier-free types of tuples of distinct elements, length 1..arity."""
    arity = B.signature.max_arity if arity is None else arity
    found = set()
    for r in range(1, max(arity, 1) + 1):
        for t in itertools.permutations(range(B.size), r):
            found.add(qf_type(B, t))
    return sorted(found, key=lambda q: (len(q[0]), q))


def one_sort_forward(B: Structure, types: Sequence | None = None) -> OneSortResult:
    """One-sorted image ``A_B``: a relation per irreflexive type, holding on its realisations.

    With ``types`` given, that table is used (and must cover every type realised in B).
    """
    table = tuple(realized_types(B) if types is None else types)
    where = {q: i for i, q in enumerate(table)}
    rels: list[set] = [set() for _ in table]
    for r in range(1, max(B.signature.max_arity, 1) + 1):
        for t in itertools.permutations(range(B.size), r):
            q = qf_type(B, t)
            if q not in where:
                raise ValueError("type table does not cover the structure")
            rels[where[q]].add(t)
    sig = Signature.one_sorted([(f"T{i}", len(q[0])) for i, q in enumerate(table)], "A")
    A = Structure(sig, (B.size,), tuple(frozenset(x) for x in rels))
    u = tuple(tuple(B.offsets[s] + x for x in range(n)) for s, n in enumerate(B.sizes))
    return OneSortResult(A, table, u, B.signature)


def one_sort_back(C: Structure, types: Sequence, source: Signature) -> Structure:
    """``B^C``: sorts read off the unary types, relations off the types of tuples.

    A relation tuple with repeated entries is decided by the type of its
    distinct core (entries in order of first occurrence).
    """
    table = tuple(types)
    unary = [i for i, q in enumerate(table) if len(q[0]) == 1]
    sort_of = []
    for c in range(C.size):
        hits = [i for i in unary if (c,) in C.relations[i]]
        if len(hits) != 1:
            raise ValueError(f"element {c} lies in {len(hits)} unary type predicates; they must partition")
        sort_of.append(table[hits[0]][1][0])
    members = [[c for c in range(C.size) if sort_of[c] == s] for s in range(len(source.sorts))]
    local = {c: members[s].index(c) for s in range(len(source.sorts)) for c in members[s]}
    type_of: dict[tuple, int] = {}
    for i, q in enumerate(table):
        for t in C.relations[i]:
            type_of[t] = i
    rels = []
    for j, prof in enumerate(source.profiles):
        out = set()
        for t in itertools.product(*(members[s] for s in prof)):
            core = tuple(dict.fromkeys(t))
            q = type_of.get(core)
            if q is None:
                continue
            pos = tuple(core.index(x) for x in t)
            if pos in table[q][2][j]:
                out.add(tuple(local[x] for x in t))
        rels.append(frozenset(out))
    return Structure(source, tuple(len(ms) for ms in members), tuple(rels))


# --------------------------------------------------------------- chain gap
@dataclass(frozen=True)
class ChainGap:
    N: int
    lhs: int  # C(N*m, r1)
    rhs: int  # C(N, r2)


def chain_gap(r1: int, r2: int, m: int) -> ChainGap:
    """Least N with ``C(N*m, r1) < C(N, r2)``."""
    if not 2 <= r1 < r2:
        raise ValueError("need 2 <= r1 < r2")
    if m < 1:
        raise ValueError("need m >= 1")
    N = 1
    while not math.comb(N * m, r1) < math.comb(N, r2):
        N += 1
    return ChainGap(N, math.comb(N * m, r1), math.comb(N, r2))


# ----------------------------------------------------- interpretation search
@dataclass
class SearchResult:
    interp: Interpretation
    witnesses: list[tuple[Structure, Structure, tuple[tuple[int, ...], ...]]]
    candidates_tried: int = 0


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def tick(self):
        self.used += 1
        if self.used > self.limit:
            from .generic import BudgetExceeded

            raise BudgetExceeded(f"witness search exceeded {self.limit} nodes")


def find_witness(
    interp: Interpretation,
    B: Structure,
    K2: ClassSpec,
    budget: int = 2_000_000,
    _budget: _Budget | None = None,
) -> tuple[Structure, tuple[tuple[int, ...], ...]] | None:
    """Search C in K2 and an injection u with the witness biconditional.

    C is built on the coordinates of u alone (so ``|C| <= m*|B|``); every
    coordinate used by a formula either repeats an earlier element or is a
    new element with any admissible relations to the previous ones.  Unused
    coordinates only separate blocks and take existing elements where
    possible.
    """
    if not K2.signature.is_one_sorted or not B.signature.is_one_sorted:
        raise ValueError("interpretation search supports one-sorted classes only")
    bud = _budget or _Budget(budget)
    m, n = interp.m, B.size
    used = sorted({t.coord for _, th in interp.thetas for t in th.terms()})
    unused = [j for j in range(m) if j not in used]
    coords = used + unused
    rels = [(j, r, interp.theta(r.name), B.relations[j]) for j, r in enumerate(B.signature.relations)]
    assign = [[-1] * m for _ in range(n)]

    def block_ok(C: Structure, i: int) -> bool:
        row = tuple(assign[i])
        if any(tuple(assign[p]) == row for p in range(i)):
            return False
        for _j, r, th, R in rels:
            for t in itertools.product(range(i + 1), repeat=r.arity):
                if i not in t:
                    continue
                flat = [x for b in t for x in assign[b]]
                if eval_flat(th, C, flat) != (t in R):
                    return False
        return True

    def rec(C: Structure, slot: int):
        bud.tick()
        if slot == n * m:
            return C if K2.hereditary or is_member(K2, C) else None
        i, j = divmod(slot, m)
        coord = coords[j]
        last = j == m - 1
        options: Iterator
        if coord in used:
            options = itertools.chain(
                ((C, x) for x in range(C.size)),
                ((T, C.size) for T in one_point_extensions(K2, C, 0, filtered=K2.hereditary)),
            )
        else:
            first = next(one_point_extensions(K2, C, 0, filtered=K2.hereditary), None)
            options = itertools.chain(((C, x) for x in range(C.size)), [] if first is None else [(first, C.size)])
        for T, x in options:
            assign[i][coord] = x
            if last and not block_ok(T, i):
                continue
            res = rec(T, slot + 1)
            if res is not None:
                return res
        assign[i][coord] = -1
        return None

    C0 = empty_structure(K2.signature)
    C = rec(C0, 0)
    if C is None:
        return None
    u = tuple(tuple(row) for row in assign)
    return C, u


def search_interpretation(
    K1: ClassSpec,
    K2: ClassSpec,
    m: int,
    max_nodes: int,
    n_max: int,
    budget: int = 5_000_000,
) -> SearchResult | None:
    """First interpretation (in formula-enumeration order) with a witness for
    every member of K1 of size <= n_max; ``None`` when none exists within bounds.
    """
    if m < 1 or max_nodes < 1 or n_max < 1:
        raise ValueError("bounds must be >= 1")
    src, tgt = K1.signature, K2.signature
    if not (src.is_one_sorted and tgt.is_one_sorted):
        raise ValueError("interpretation search supports one-sorted classes only")
    pools = [list(enumerate_formulas(tgt, r.arity, m, max_nodes)) for r in src.relations]
    sources = [B for n in range(1, n_max + 1) for B in enumerate_members(K1, n)]
    bud = _Budget(budget)
    tried = 0
    for combo in itertools.product(*pools):
        tried += 1
        interp = Interpretation(src, tgt, m, tuple((r.name, th) for r, th in zip(src.relations, combo)))
        witnesses = []
        for B in sources:
            found = find_witness(interp, B, K2, _budget=bud)
            if found is None:
                break
            witnesses.append((B, found[0], found[1]))
        else:
            return SearchResult(interp, witnesses, tried)
    return None
