"""Decidable classes of finite structures and bounded checks of the class axioms."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .structures import (
    Embedding,
    RelationSymbol,
    Signature,
    SignatureMismatch,
    Structure,
    canonical_form,
    empty_structure,
    induced_global,
    iter_embeddings_global,
    qf_type,
    reduct,
)

AXIOMS = ("HP", "JEP", "AP", "disjoint-JEP", "disjoint-AP")


@dataclass(frozen=True)
class Forbidden:
    """No induced substructure isomorphic to any of ``structures``.

    A forbidden structure may live on a sub-signature; it is then matched
    against the corresponding reduct.
    """

    structures: tuple[Structure, ...]


@dataclass(frozen=True)
class Builtin:
    """A named structural constraint.

    Known names and parameters:

    ``hyperedge(R)``            R is symmetric and irreflexive
    ``linear_order(R)``         R is a strict linear order of its sort
    ``partition(U0, ..)``       every element lies in exactly one of the unary U's
    ``transversal(R, U0, ..)``  every R-tuple meets each U exactly once
    ``max_edges(R, n)``         at most n distinct underlying sets of R-tuples
    """

    name: str
    params: tuple


BUILTINS = ("hyperedge", "linear_order", "partition", "transversal", "max_edges")


@dataclass(frozen=True)
class ClassSpec:
    signature: Signature
    constraints: tuple = ()
    name: str = "Fin"
    hereditary: bool = True

    def __post_init__(self):
        for c in self.constraints:
            if isinstance(c, Forbidden):
                for F in c.structures:
                    if F.signature.sorts != self.signature.sorts or not all(
                        r in self.signature.relations for r in F.signature.relations
                    ):
                        raise SignatureMismatch("forbidden structure is not over a sub-signature")
            elif isinstance(c, Builtin):
                if c.name not in BUILTINS:
                    raise ValueError(f"unknown builtin constraint {c.name!r}")
            else:
                raise TypeError(f"unsupported constraint {c!r}")

    def __str__(self) -> str:
        return self.name

    @property
    def builtins(self) -> list[Builtin]:
        return [c for c in self.constraints if isinstance(c, Builtin)]

    @property
    def forbidden(self) -> list[Structure]:
        return [F for c in self.constraints if isinstance(c, Forbidden) for F in c.structures]

    def kind(self, rel: str) -> str:
        for b in self.builtins:
            if b.name == "hyperedge" and b.params[0] == rel:
                return "hyperedge"
            if b.name == "linear_order" and b.params[0] == rel:
                return "order"
        return "free"

    def with_constraints(self, *extra, name: str | None = None, signature: Signature | None = None) -> "ClassSpec":
        return ClassSpec(signature or self.signature, self.constraints + tuple(extra), name or self.name, self.hereditary)


# --------------------------------------------------------------- membership
def _check_builtin(b: Builtin, S: Structure) -> bool:
    sig = S.signature
    if b.name == "hyperedge":
        R = S.rel(b.params[0])
        if not R:
            return True
        # irreflexive and orbit-closed: every edge set carries exactly r! tuples
        counts: dict[frozenset, int] = {}
        for t in R:
            key = frozenset(t)
            counts[key] = counts.get(key, 0) + 1
        r = len(next(iter(R)))
        full = math.factorial(r)
        return all(len(k) == r and c == full for k, c in counts.items())
    if b.name == "linear_order":
        R = S.rel(b.params[0])
        s = sig.profiles[sig.index(b.params[0])][0]
        n = S.sizes[s]
        order = _linear_order_list(R, n)
        if order is None or len(R) != n * (n - 1) // 2:
            return False
        return all((order[i], order[j]) in R for i in range(n) for j in range(i + 1, n))
    if b.name == "partition":
        rels = [S.rel(u) for u in b.params]
        s = sig.profiles[sig.index(b.params[0])][0]
        return all(sum((x,) in r for r in rels) == 1 for x in range(S.sizes[s]))
    if b.name == "transversal":
        R = S.rel(b.params[0])
        parts = [S.rel(u) for u in b.params[1:]]
        for t in R:
            hits = [[i for i, p in enumerate(parts) if (x,) in p] for x in t]
            if any(len(h) != 1 for h in hits) or sorted(h[0] for h in hits) != list(range(len(parts))):
                return False
        return True
    if b.name == "max_edges":
        rel, bound = b.params
        return len({frozenset(t) for t in S.rel(rel)}) <= int(bound)
    raise ValueError(b.name)


def embeds_through(F: Structure, S: Structure, g: int) -> bool:
    """Does some embedding ``F -> S`` use the element ``g`` (global id)?"""
    sort = S.sort_of[g]
    for i in range(F.size):
        if F.sort_of[i] == sort:
            if next(iter_embeddings_global(F, S, partial={i: g}), None) is not None:
                return True
    return False


def _view(S: Structure, F: Structure) -> Structure:
    return S if F.signature == S.signature else reduct(S, F.signature)


def is_member(K: ClassSpec, S: Structure) -> bool:
    if S.signature != K.signature:
        raise SignatureMismatch(f"structure is not over the signature of {K.name}")
    if not all(_check_builtin(b, S) for b in K.builtins):
        return False
    return not any(next(iter_embeddings_global(F, _view(S, F)), None) is not None for F in K.forbidden)


def _local_ok(K: ClassSpec, S: Structure, new_global: int) -> bool:
    """Membership of ``S`` given that ``S`` minus ``new_global`` is a member."""
    if not all(_check_builtin(b, S) for b in K.builtins):
        return False
    return not any(embeds_through(F, _view(S, F), new_global) for F in K.forbidden)


# ------------------------------------------------------- one-point extension
def _linear_order_list(R: frozenset, n: int) -> list[int] | None:
    below = [0] * n
    for x, _y in R:
        below[_y] += 1
    order = sorted(range(n), key=lambda x: below[x])
    if sorted(below) != list(range(n)):
        return None
    return order


def _relation_options(
    K: ClassSpec,
    S: Structure,
    sizes: tuple[int, ...],
    sort: int,
    j: int,
    forced_in: set,
    forced_out: set,
) -> Iterator[frozenset]:
    """Possible sets of new tuples of relation ``j`` involving the new element."""
    sig = K.signature
    rel = sig.relations[j]
    prof = sig.profiles[j]
    new = sizes[sort] - 1
    kind = K.kind(rel.name)
    fin = {t for (jj, t) in forced_in if jj == j}
    fout = {t for (jj, t) in forced_out if jj == j}
    if sort not in prof:
        if fin:
            return
        yield frozenset()
        return
    if kind == "hyperedge":
        if any(len(set(t)) != len(t) or new not in t for t in fin):
            return
        orbits = []
        fixed_in, fixed_out = set(), set()
        for Y in itertools.combinations(range(new), rel.arity - 1):
            key = frozenset(Y + (new,))
            orbits.append(key)
        for t in fin:
            fixed_in.add(frozenset(t))
        for t in fout:
            if len(set(t)) == len(t) and new in t:
                fixed_out.add(frozenset(t))
        if fixed_in & fixed_out:
            return
        free = [o for o in orbits if o not in fixed_in and o not in fixed_out]
        base = [o for o in orbits if o in fixed_in]
        for bits in itertools.product((0, 1), repeat=len(free)):
            chosen = base + [o for o, b in zip(free, bits) if b]
            yield frozenset(p for o in chosen for p in itertools.permutations(sorted(o)))
        return
    if kind == "order":
        order = _linear_order_list(S.rel(rel.name), new)
        if order is not None:
            for p in range(new + 1):
                tuples = {(x, new) for x in order[:p]} | {(new, x) for x in order[p:]}
                if fin <= tuples and not (fout & tuples):
                    yield frozenset(tuples)
            return
    # free relation (or an order relation on a non-order, handled freely)
    cands = [
        t
        for t in itertools.product(*(range(sizes[s]) for s in prof))
        if any(s == sort and x == new for s, x in zip(prof, t))
    ]
    if fin - set(cands) or fin & fout:
        return
    free = [t for t in cands if t not in fin and t not in fout]
    for bits in itertools.product((0, 1), repeat=len(free)):
        yield frozenset(fin) | frozenset(t for t, b in zip(free, bits) if b)


def one_point_extensions(
    K: ClassSpec,
    S: Structure,
    sort: int = 0,
    forced_in: Iterable = (),
    forced_out: Iterable = (),
    filtered: bool = True,
) -> Iterator[Structure]:
    """Structures ``S + {new}`` (new element appended to ``sort``).

    ``forced_in``/``forced_out`` are ``(relation index, local tuple)`` pairs
    that must (not) hold.  With ``filtered`` the result is checked against
    every constraint, assuming ``S`` itself is a member.
    """
    sizes = tuple(n + (1 if s == sort else 0) for s, n in enumerate(S.sizes))
    forced_in, forced_out = set(forced_in), set(forced_out)
    nrel = len(K.signature.relations)
    g_new = sum(sizes[: sort + 1]) - 1

    def rec(j: int, acc: list[frozenset]) -> Iterator[Structure]:
        if j == nrel:
            rels = tuple(S.relations[i] | acc[i] for i in range(nrel))
            T = Structure(K.signature, sizes, rels)
            if not filtered or _local_ok(K, T, g_new):
                yield T
            return
        for opt in _relation_options(K, S, sizes, sort, j, forced_in, forced_out):
            acc.append(opt)
            yield from rec(j + 1, acc)
            acc.pop()

    yield from rec(0, [])


def default_extension(
    K: ClassSpec, S: Structure, sort: int, forced_in: Iterable, forced_out: Iterable
) -> Structure | None:
    """The extension with only the forced tuples (first order position), if a member."""
    sizes = tuple(n + (1 if s == sort else 0) for s, n in enumerate(S.sizes))
    forced_in, forced_out = set(forced_in), set(forced_out)
    rels = []
    for j, rel in enumerate(K.signature.relations):
        kind = K.kind(rel.name)
        if kind == "order" and sort in K.signature.profiles[j]:
            opt = next(_relation_options(K, S, sizes, sort, j, forced_in, forced_out), None)
        else:
            fin = {t for (jj, t) in forced_in if jj == j}
            if fin & {t for (jj, t) in forced_out if jj == j}:
                return None
            if kind == "hyperedge":
                if any(len(set(t)) != len(t) for t in fin):
                    return None
                fin = {p for t in fin for p in itertools.permutations(t)}
                if fin & {t for (jj, t) in forced_out if jj == j}:
                    return None
            opt = frozenset(fin)
        if opt is None:
            return None
        rels.append(S.relations[j] | opt)
    T = Structure(K.signature, sizes, tuple(rels))
    return T if _local_ok(K, T, sum(sizes[: sort + 1]) - 1) else None


# -------------------------------------------------------------- enumeration
@lru_cache(maxsize=None)
def _level(K: ClassSpec, n: int) -> tuple[tuple[bytes, Structure], ...]:
    if n == 0:
        E = empty_structure(K.signature)
        return ((canonical_form(E), E),)
    seen: dict[bytes, Structure] = {}
    for _, S in _level(K, n - 1):
        for sort in range(len(K.signature.sorts)):
            for T in one_point_extensions(K, S, sort, filtered=K.hereditary):
                code = canonical_form(T)
                if code not in seen:
                    seen[code] = T
    return tuple(sorted(seen.items()))


def enumerate_members(K: ClassSpec, n: int) -> list[Structure]:
    """One member per isomorphism type of total size ``n``, sorted by canonical code."""
    if n < 0:
        raise ValueError("n must be >= 0")
    reps = [S for _, S in _level(K, n)]
    if K.hereditary:
        return reps
    return [S for S in reps if is_member(K, S)]


def members_up_to(K: ClassSpec, n: int) -> list[Structure]:
    return [S for m in range(n + 1) for S in enumerate_members(K, m)]


# -------------------------------------------------------------- amalgamation
def _embedding(A: Structure, B: Structure, gmap: Sequence[int]) -> Embedding:
    maps = []
    for s, n in enumerate(A.sizes):
        o = A.offsets[s]
        maps.append(tuple(B.to_local(gmap[o + x])[1] for x in range(n)))
    return Embedding(A, B, tuple(maps))


def amalgamate(
    K: ClassSpec,
    B1: Structure,
    B2: Structure,
    f1: Sequence[int] = (),
    f2: Sequence[int] = (),
    disjoint: bool = False,
) -> tuple[Structure, tuple[int, ...], tuple[int, ...]] | None:
    """Search an amalgam of ``B1`` and ``B2`` over ``f1: A -> B1``, ``f2: A -> B2``.

    Maps are global-id tuples indexed by the elements of A.  The amalgam lives
    on the union of the two images (no extra points are ever needed for a
    hereditary class).  Returns ``(C, g1, g2)``, where B1 keeps its local
    indices inside C, or ``None`` when no amalgam exists.  The free amalgam
    (no new tuples) is tried first; it is also the first candidate of the
    search, so the shortcut never changes the answer.
    """
    B1.same_signature(B2)
    sig = K.signature
    img2 = {b: f1[i] for i, b in enumerate(f2)}
    core = set(f1)
    rest = [b for b in range(B2.size) if b not in img2]
    profs = sig.profiles
    rels2 = B2.global_relations

    def forced(C: Structure, g2: dict[int, int], b: int, c_local: int, sort: int):
        """Tuples of B2 over placed elements plus b, translated into C-local form."""
        placed = list(g2) + [b]
        fin, fout = set(), set()
        for j, prof in enumerate(profs):
            pools = [[x for x in placed if B2.sort_of[x] == s] for s in prof]
            for t in itertools.product(*pools):
                if b not in t:
                    continue
                loc = tuple(
                    c_local if x == b else C.to_local(g2[x])[1] for x in t
                )
                (fin if t in rels2[j] else fout).add((j, loc))
        return fin, fout

    def consistent_identify(C: Structure, g2: dict[int, int], b: int, c: int) -> bool:
        trial = dict(g2)
        trial[b] = c
        placed = list(trial)
        relsC = C.global_relations
        for j, prof in enumerate(profs):
            pools = [[x for x in placed if B2.sort_of[x] == s] for s in prof]
            for t in itertools.product(*pools):
                if b in t and ((t in rels2[j]) != (tuple(trial[x] for x in t) in relsC[j])):
                    return False
        return True

    def rec(C: Structure, g2: dict[int, int], i: int):
        if i == len(rest):
            if not K.hereditary and not is_member(K, C):
                return None
            return C, tuple(range(B1.size)), tuple(g2[b] for b in range(B2.size))
        b = rest[i]
        sort = B2.sort_of[b]
        new_local = C.sizes[sort]
        fin, fout = forced(C, g2, b, new_local, sort)
        for T in one_point_extensions(K, C, sort, fin, fout, filtered=K.hereditary):
            # global ids shift when a non-last sort grows
            shift = lambda g: g + 1 if C.sort_of[g] > sort else g  # noqa: E731
            g2n = {x: shift(y) for x, y in g2.items()}
            g2n[b] = T.offsets[sort] + new_local
            res = rec(T, g2n, i + 1)
            if res is not None:
                return _unshift(res, B1, C, T, sort)
        if not disjoint:
            used = set(g2.values())
            for c in range(C.size):
                if c < B1.size and c not in core and c not in used and C.sort_of[c] == sort:
                    if consistent_identify(C, g2, b, c):
                        g2n = dict(g2)
                        g2n[b] = c
                        res = rec(C, g2n, i + 1)
                        if res is not None:
                            return res
        return None

    start = {b: a1 for b, a1 in img2.items()}
    for b, a1 in start.items():
        if B2.sort_of[b] != B1.sort_of[a1]:
            raise ValueError("f1 and f2 disagree on sorts")
    free = _free_amalgam(B1, B2, start, rest)
    if is_member(K, free[0]):
        return free
    return rec(B1, start, 0)


def _free_amalgam(B1: Structure, B2: Structure, start: dict[int, int], rest: list[int]):
    sizes = list(B1.sizes)
    loc2: dict[int, int] = {}
    for b in rest:
        s = B2.sort_of[b]
        loc2[b] = sizes[s]
        sizes[s] += 1
    for b, a1 in start.items():
        loc2[b] = B1.to_local(a1)[1]
    rels = tuple(
        r1 | frozenset(tuple(loc2[B2.to_global(s, x)] for s, x in zip(prof, t)) for t in r2)
        for prof, r1, r2 in zip(B1.signature.profiles, B1.relations, B2.relations)
    )
    C = Structure(B1.signature, tuple(sizes), rels)
    g1 = tuple(C.to_global(B1.sort_of[x], B1.to_local(x)[1]) for x in range(B1.size))
    g2 = tuple(C.to_global(B2.sort_of[b], loc2[b]) for b in range(B2.size))
    return C, g1, g2


def _unshift(res, B1, C, T, sort):
    # B1's elements keep their local positions; recompute g1 as global ids in the final C.
    Cf, _, g2 = res
    g1 = tuple(Cf.to_global(B1.sort_of[x], B1.to_local(x)[1]) for x in range(B1.size))
    return Cf, g1, g2


@dataclass
class AmalgamationReport:
    axiom: str
    bound: int
    holds: bool
    A: Structure | None = None
    B1: Structure | None = None
    B2: Structure | None = None
    f1: Embedding | None = None
    f2: Embedding | None = None
    instances: int = 0

    @property
    def verdict(self) -> str:
        return f"holds-up-to-{self.bound}" if self.holds else "counterexample"

    def recheck(self, K: ClassSpec) -> bool:
        """True iff the stored counterexample is a genuine failure."""
        if self.holds:
            return False
        if self.axiom == "HP":
            return is_member(K, self.B1) and not is_member(K, self.A) and self.f1.is_valid()
        if not (self.f1.is_valid() and self.f2.is_valid()):
            return False
        if not all(is_member(K, X) for X in (self.A, self.B1, self.B2)):
            return False
        return amalgamate(
            K, self.B1, self.B2, self.f1.global_map, self.f2.global_map, self.axiom.startswith("disjoint")
        ) is None


def _pointed_code(A: Structure, B: Structure, g: Sequence[int]) -> bytes:
    extra = tuple(
        RelationSymbol(f"__c{i}", 1, (B.signature.sorts[B.sort_of[g[i]]],)) for i in range(A.size)
    )
    sig = B.signature.extend(*extra)
    rels = B.relations + tuple(frozenset({(B.to_local(g[i])[1],)}) for i in range(A.size))
    return canonical_form(Structure(sig, B.sizes, rels))


def embeddings_up_to_aut(A: Structure, B: Structure) -> list[tuple[int, ...]]:
    """Embeddings ``A -> B`` modulo automorphisms of ``B`` (global-id maps)."""
    seen: dict[bytes, tuple[int, ...]] = {}
    for g in iter_embeddings_global(A, B):
        seen.setdefault(_pointed_code(A, B, g), g)
    return list(seen.values())


def check_axiom(K: ClassSpec, axiom: str, n: int) -> AmalgamationReport:
    """Exhaustively check ``axiom`` on all instances with every structure of size <= n."""
    if axiom not in AXIOMS:
        raise ValueError(f"axiom must be one of {AXIOMS}")
    if n < 1:
        raise ValueError("bound must be >= 1")
    count = 0
    if axiom == "HP":
        for B in members_up_to(K, n):
            for k in range(B.size):
                for X in itertools.combinations(range(B.size), k):
                    A, keep = induced_global(B, X)
                    count += 1
                    if not is_member(K, A):
                        return AmalgamationReport(axiom, n, False, A=A, B1=B, f1=_embedding(A, B, keep), instances=count)
        return AmalgamationReport(axiom, n, True, instances=count)

    disjoint = axiom.startswith("disjoint")
    members = members_up_to(K, n)
    bases = [enumerate_members(K, 0)[0]] if axiom.endswith("JEP") else members
    for A in bases:
        # a bijective f1 or f2 amalgamates trivially, so only proper extensions are checked
        above = [B for B in members if B.size > A.size]
        auts = list(iter_embeddings_global(A, A))
        emb, codes = {}, {}
        for i, B in enumerate(above):
            emb[i] = embeddings_up_to_aut(A, B)
            codes[i] = [[_pointed_code(A, B, tuple(g[x] for x in s)) for s in auts] for g in emb[i]]
        for i, j in itertools.combinations_with_replacement(range(len(above)), 2):
            B1, B2 = above[i], above[j]
            seen = set()
            for p, f1 in enumerate(emb[i]):
                for q, f2 in enumerate(emb[j]):
                    # instances related by an automorphism of A (or by swapping
                    # the sides when B1 = B2) have the same answer
                    key = min(zip(codes[i][p], codes[j][q]))
                    if i == j:
                        key = min(key, min(zip(codes[j][q], codes[i][p])))
                    if key in seen:
                        continue
                    seen.add(key)
                    count += 1
                    if amalgamate(K, B1, B2, f1, f2, disjoint) is None:
                        return AmalgamationReport(
                            axiom, n, False, A=A, B1=B1, B2=B2,
                            f1=_embedding(A, B1, f1), f2=_embedding(A, B2, f2), instances=count,
                        )
    return AmalgamationReport(axiom, n, True, instances=count)


# ------------------------------------------------------------ factorization
def factorization_window_check(
    K: ClassSpec,
    factors: Sequence[ClassSpec],
    A: Structure,
    factor_structures: Sequence[Structure],
    u: Mapping[int, Sequence[int]] | Sequence[Sequence[int]],
    k: int,
) -> bool:
    """Check that quantifier-free types of tuples of length <= k in ``A`` match
    exactly the coordinate-wise types of their images.

    ``u`` sends each element of ``A`` (global id) to one element per factor
    structure.  Returns True iff ``qtp(a) = qtp(a')  <=>  coordinate-wise
    types of u(a), u(a') agree`` for all a, a' of equal length <= k.
    """
    if len(factors) != len(factor_structures):
        raise ValueError("one factor structure per factor class required")
    if not is_member(K, A):
        raise ValueError("A is not a member of K")
    for F, B in zip(factors, factor_structures):
        if not is_member(F, B):
            raise ValueError(f"factor structure is not a member of {F.name}")
    images = [tuple(u[a]) for a in range(A.size)]
    if len(set(images)) != len(images):
        raise ValueError("u is not injective")
    fwd: dict = {}
    back: dict = {}
    for length in range(1, k + 1):
        for t in itertools.product(range(A.size), repeat=length):
            ta = qf_type(A, t)
            tb = tuple(qf_type(B, tuple(images[a][i] for a in t)) for i, B in enumerate(factor_structures))
            if fwd.setdefault(ta, tb) != tb or back.setdefault(tb, ta) != ta:
                return False
    return True
