"""Finite multi-sorted relational structures.

Elements of each sort are the integers ``0 .. size-1``.  Internally many
routines work with *global* element ids, where sort ``s`` occupies the range
``offset[s] .. offset[s] + size[s] - 1``.
"""

from __future__ import annotations

import itertools
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np


class SignatureMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RelationSymbol:
    name: str
    arity: int
    profile: tuple[str, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError(f"relation {self.name!r} must have arity >= 1")
        if len(self.profile) != self.arity:
            raise ValueError(f"relation {self.name!r}: profile length != arity")


@dataclass(frozen=True)
class Signature:
    sorts: tuple[str, ...]
    relations: tuple[RelationSymbol, ...]

    def __post_init__(self):
        if len(set(self.sorts)) != len(self.sorts) or not self.sorts:
            raise ValueError("sort names must be non-empty and unique")
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValueError("relation names must be unique")
        for r in self.relations:
            for s in r.profile:
                if s not in self.sorts:
                    raise ValueError(f"relation {r.name!r} uses undeclared sort {s!r}")

    @classmethod
    def one_sorted(cls, rels: Iterable[tuple[str, int]], sort: str = "V") -> "Signature":
        return cls((sort,), tuple(RelationSymbol(n, a, (sort,) * a) for n, a in rels))

    @property
    def is_one_sorted(self) -> bool:
        return len(self.sorts) == 1

    @property
    def max_arity(self) -> int:
        return max((r.arity for r in self.relations), default=0)

    @cached_property
    def _rel_index(self) -> dict[str, int]:
        return {r.name: i for i, r in enumerate(self.relations)}

    @cached_property
    def _sort_index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.sorts)}

    def index(self, name: str) -> int:
        try:
            return self._rel_index[name]
        except KeyError:
            raise KeyError(f"no relation {name!r} in signature") from None

    def relation(self, name: str) -> RelationSymbol:
        return self.relations[self.index(name)]

    def sort_index(self, sort: str) -> int:
        return self._sort_index[sort]

    @cached_property
    def profiles(self) -> tuple[tuple[int, ...], ...]:
        """Sort profile of every relation as sort indices."""
        return tuple(tuple(self._sort_index[s] for s in r.profile) for r in self.relations)

    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    def extend(self, *rels: RelationSymbol) -> "Signature":
        return Signature(self.sorts, self.relations + tuple(rels))


@dataclass(frozen=True)
class Structure:
    """A finite structure; immutable.  Build with :meth:`build`."""

    signature: Signature
    sizes: tuple[int, ...]
    relations: tuple[frozenset, ...]

    def __post_init__(self):
        sig = self.signature
        if len(self.sizes) != len(sig.sorts):
            raise ValueError("one size per sort required")
        if any(n < 0 for n in self.sizes):
            raise ValueError("sizes must be non-negative")
        if len(self.relations) != len(sig.relations):
            raise ValueError("one tuple set per relation symbol required")
        for rel, prof, tuples in zip(sig.relations, sig.profiles, self.relations):
            for t in tuples:
                if len(t) != rel.arity:
                    raise ValueError(f"{rel.name}: tuple {t} has wrong length")
                for x, s in zip(t, prof):
                    if not 0 <= x < self.sizes[s]:
                        raise ValueError(f"{rel.name}: element {x} out of range in {t}")

    @classmethod
    def build(
        cls,
        signature: Signature,
        sizes: int | Sequence[int],
        relations: Mapping[str, Iterable[Sequence[int]]] | None = None,
    ) -> "Structure":
        if isinstance(sizes, int):
            sizes = (sizes,)
        relations = dict(relations or {})
        unknown = set(relations) - set(signature.names())
        if unknown:
            raise KeyError(f"unknown relation(s) {sorted(unknown)}")
        rels = tuple(
            frozenset(tuple(int(x) for x in t) for t in relations.get(r.name, ()))
            for r in signature.relations
        )
        return cls(signature, tuple(int(n) for n in sizes), rels)

    # ------------------------------------------------------------------ basics
    @property
    def size(self) -> int:
        return sum(self.sizes)

    def __len__(self) -> int:
        return self.size

    def rel(self, name: str) -> frozenset:
        return self.relations[self.signature.index(name)]

    def holds(self, name: str, t: Sequence[int]) -> bool:
        return tuple(t) in self.rel(name)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(itertools.accumulate((0,) + self.sizes[:-1]))

    @cached_property
    def sort_of(self) -> tuple[int, ...]:
        return tuple(s for s, n in enumerate(self.sizes) for _ in range(n))

    def to_global(self, sort: int, x: int) -> int:
        return self.offsets[sort] + x

    def to_local(self, g: int) -> tuple[int, int]:
        s = self.sort_of[g]
        return s, g - self.offsets[s]

    @cached_property
    def global_relations(self) -> tuple[frozenset, ...]:
        """Relations with elements rewritten as global ids."""
        out = []
        for prof, tuples in zip(self.signature.profiles, self.relations):
            offs = [self.offsets[s] for s in prof]
            out.append(frozenset(tuple(o + x for o, x in zip(offs, t)) for t in tuples))
        return tuple(out)

    def dense(self, index: int) -> np.ndarray:
        """Relation ``index`` as a dense uint8 array indexed by its profile sizes."""
        return self._dense[index]

    @cached_property
    def _dense(self) -> tuple[np.ndarray, ...]:
        arrays = []
        for prof, tuples in zip(self.signature.profiles, self.relations):
            arr = np.zeros(tuple(self.sizes[s] for s in prof), dtype=np.uint8)
            if tuples:
                idx = np.array(sorted(tuples), dtype=np.int64)
                arr[tuple(idx.T)] = 1
            arrays.append(arr)
        return tuple(arrays)

    def relabel(self, perms: Sequence[Sequence[int]] | Sequence[int]) -> "Structure":
        """Image under per-sort bijections; ``perms[s][old] = new``.

        A single flat permutation is accepted for one-sorted structures.
        """
        if perms and isinstance(perms[0], (int, np.integer)):
            perms = (perms,)
        for p, n in zip(perms, self.sizes):
            if sorted(p) != list(range(n)):
                raise ValueError("relabel needs a bijection on every sort")
        rels = []
        for prof, tuples in zip(self.signature.profiles, self.relations):
            rels.append(frozenset(tuple(perms[s][x] for s, x in zip(prof, t)) for t in tuples))
        return Structure(self.signature, self.sizes, tuple(rels))

    def same_signature(self, other: "Structure") -> None:
        if self.signature != other.signature:
            raise SignatureMismatch("structures have different signatures")

    def __repr__(self) -> str:
        parts = [f"{r.name}={sorted(t)}" for r, t in zip(self.signature.relations, self.relations)]
        return f"Structure(sizes={self.sizes}, {', '.join(parts)})"


def empty_structure(signature: Signature) -> Structure:
    return Structure.build(signature, (0,) * len(signature.sorts))


# ---------------------------------------------------------------- embeddings
@dataclass(frozen=True)
class Embedding:
    source: Structure = field(repr=False)
    target: Structure = field(repr=False)
    maps: tuple[tuple[int, ...], ...]

    def __call__(self, x: int, sort: int = 0) -> int:
        return self.maps[sort][x]

    @property
    def global_map(self) -> tuple[int, ...]:
        src, tgt = self.source, self.target
        return tuple(
            tgt.to_global(s, y) for s, m in enumerate(self.maps) for y in m
        ) if src.size else ()

    def compose(self, after: "Embedding") -> "Embedding":
        """``after ∘ self``."""
        return Embedding(
            self.source,
            after.target,
            tuple(tuple(after.maps[s][y] for y in m) for s, m in enumerate(self.maps)),
        )

    def is_valid(self) -> bool:
        return is_embedding(self.source, self.target, self.maps)


def is_embedding(A: Structure, B: Structure, maps: Sequence[Sequence[int]]) -> bool:
    """Full check: injective per sort, preserves and reflects every relation."""
    A.same_signature(B)
    for s, m in enumerate(maps):
        if len(m) != A.sizes[s] or len(set(m)) != len(m):
            return False
        if any(not 0 <= y < B.sizes[s] for y in m):
            return False
    for prof, ra, rb in zip(A.signature.profiles, A.relations, B.relations):
        for t in itertools.product(*(range(A.sizes[s]) for s in prof)):
            img = tuple(maps[s][x] for s, x in zip(prof, t))
            if (t in ra) != (img in rb):
                return False
    return True


class _Incidence:
    """Per-element lists of the relation tuples (global ids) containing it."""

    __slots__ = ("occ",)

    def __init__(self, S: Structure):
        occ: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in range(S.size)]
        for ri, tuples in enumerate(S.global_relations):
            for t in tuples:
                for x in set(t):
                    occ[x].append((ri, t))
        self.occ = occ


def _global_profiles(S: Structure) -> list[tuple[int, ...]]:
    return list(S.signature.profiles)


def iter_embeddings_global(
    A: Structure,
    B: Structure,
    partial: Mapping[int, int] | None = None,
    avoid: Iterable[int] = (),
) -> Iterator[tuple[int, ...]]:
    """Yield embeddings ``A -> B`` as global-id tuples, lexicographically.

    ``partial`` fixes images of some A-elements (global ids); ``avoid`` lists
    B-elements that may not be used by the remaining elements.
    """
    n = A.size
    sortA, sortB = A.sort_of, B.sort_of
    relsA, relsB = A.global_relations, B.global_relations
    profs = A.signature.profiles
    offA, offB = A.offsets, B.offsets
    by_sort = [list(range(offB[s], offB[s] + B.sizes[s])) for s in range(len(B.sizes))]
    fixed = dict(partial or {})
    avoid = set(avoid)
    image = [-1] * n
    used: set[int] = set()

    # tuples of A's relation "frames": every position tuple over A restricted
    # to the prefix {0..i}; checked when the last new element is placed.
    def consistent(i: int) -> bool:
        # all tuples over elements 0..i that contain i
        for ri, prof in enumerate(profs):
            ra, rb = relsA[ri], relsB[ri]
            choices = []
            for s in prof:
                lo = offA[s]
                hi = min(lo + A.sizes[s], i + 1)
                if hi <= lo:
                    break
                choices.append(range(lo, hi))
            else:
                if sortA[i] not in prof:
                    continue
                for t in itertools.product(*choices):
                    if i not in t:
                        continue
                    img = tuple(image[x] for x in t)
                    if (t in ra) != (img in rb):
                        return False
        return True

    def rec(i: int) -> Iterator[tuple[int, ...]]:
        if i == n:
            yield tuple(image)
            return
        if i in fixed:
            cands = [fixed[i]]
        else:
            cands = [y for y in by_sort[sortA[i]] if y not in avoid]
        for y in cands:
            if y in used or sortB[y] != sortA[i]:
                continue
            image[i] = y
            used.add(y)
            if consistent(i):
                yield from rec(i + 1)
            used.discard(y)
            image[i] = -1

    yield from rec(0)


def _split_global(A: Structure, B: Structure, gmap: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    out = []
    for s, n in enumerate(A.sizes):
        o = A.offsets[s]
        out.append(tuple(B.to_local(gmap[o + x])[1] for x in range(n)))
    return tuple(out)


def enumerate_embeddings(A: Structure, B: Structure) -> list[Embedding]:
    """All embeddings ``A -> B`` in lexicographic order of their maps."""
    A.same_signature(B)
    return [Embedding(A, B, _split_global(A, B, g)) for g in iter_embeddings_global(A, B)]


def embeds(A: Structure, B: Structure) -> bool:
    A.same_signature(B)
    return next(iter_embeddings_global(A, B), None) is not None


def induced_substructure(
    S: Structure, X: Sequence[Iterable[int]] | Iterable[int]
) -> tuple[Structure, tuple[tuple[int, ...], ...]]:
    """Restriction of ``S`` to ``X``; returns ``(sub, index_map)``.

    ``index_map[s][i]`` is the element of ``S`` that became element ``i`` of
    sort ``s``.  For one-sorted ``S``, ``X`` may be a flat iterable of ints.
    """
    X = list(X)
    if S.signature.is_one_sorted and (not X or isinstance(X[0], (int, np.integer))):
        X = [X]
    if len(X) != len(S.sizes):
        raise ValueError("one element subset per sort required")
    keep = []
    for s, xs in enumerate(X):
        xs = sorted(set(int(x) for x in xs))
        for x in xs:
            if not 0 <= x < S.sizes[s]:
                raise IndexError(f"element {x} out of range for sort {S.signature.sorts[s]}")
        keep.append(tuple(xs))
    new = [{x: i for i, x in enumerate(xs)} for xs in keep]
    rels = []
    for prof, tuples in zip(S.signature.profiles, S.relations):
        rels.append(
            frozenset(
                tuple(new[s][x] for s, x in zip(prof, t))
                for t in tuples
                if all(x in new[s] for s, x in zip(prof, t))
            )
        )
    return Structure(S.signature, tuple(len(k) for k in keep), tuple(rels)), tuple(keep)


def induced_global(S: Structure, gs: Iterable[int]) -> tuple[Structure, tuple[int, ...]]:
    """Induced substructure on global ids; returns ``(sub, new_global -> old_global)``."""
    gs = sorted(set(gs))
    X: list[list[int]] = [[] for _ in S.sizes]
    for g in gs:
        s, x = S.to_local(g)
        X[s].append(x)
    sub, _ = induced_substructure(S, X)
    return sub, tuple(gs)


def disjoint_union(A: Structure, B: Structure) -> Structure:
    """``A`` followed by ``B`` in every sort, with no tuples across."""
    A.same_signature(B)
    rels = []
    for prof, ra, rb in zip(A.signature.profiles, A.relations, B.relations):
        shifted = {tuple(x + A.sizes[s] for s, x in zip(prof, t)) for t in rb}
        rels.append(frozenset(ra) | frozenset(shifted))
    return Structure(A.signature, tuple(a + b for a, b in zip(A.sizes, B.sizes)), tuple(rels))


def qf_type(S: Structure, elems: Sequence[int]) -> tuple:
    """Quantifier-free type of a tuple of *global* ids, as a hashable code.

    The code records the equality pattern, the sorts, and every atomic fact
    ``R(x_p0, ..., x_pr)`` holding among the positions.
    """
    k = len(elems)
    first = {}
    pattern = tuple(first.setdefault(g, i) for i, g in enumerate(elems))
    sorts = tuple(S.sort_of[g] for g in elems)
    facts = []
    for prof, rel in zip(S.signature.profiles, S.global_relations):
        pos = [[i for i in range(k) if sorts[i] == s] for s in prof]
        hit = tuple(
            p for p in itertools.product(*pos) if tuple(elems[i] for i in p) in rel
        )
        facts.append(hit)
    return (pattern, sorts, tuple(facts))


# ------------------------------------------------------------ canonical form
CanonicalCode = bytes


class _Canon:
    def __init__(self, S: Structure):
        self.S = S
        self.n = S.size
        self.inc = _Incidence(S).occ
        self.best: bytes | None = None
        self.best_leaf: list[int] | None = None
        self.first: bytes | None = None
        self.first_leaf: list[int] | None = None
        self.autos: list[list[int]] = []

    def refine(self, colors: list[int]) -> list[int]:
        n = self.n
        ncls = len(set(colors))
        while True:
            keys = []
            for g in range(n):
                sig = []
                for ri, t in self.inc[g]:
                    pat = tuple(i for i, x in enumerate(t) if x == g)
                    sig.append((ri, pat, tuple(colors[x] for x in t)))
                sig.sort()
                keys.append((colors[g], tuple(sig)))
            order = {k: i for i, k in enumerate(sorted(set(keys)))}
            new = [order[k] for k in keys]
            if len(order) == ncls:
                return new
            colors, ncls = new, len(order)

    def leaf_code(self, colors: list[int]) -> bytes:
        S = self.S
        out = [struct.pack(">I", len(S.sizes))]
        out += [struct.pack(">I", n) for n in S.sizes]
        for prof, tuples in zip(S.signature.profiles, S.global_relations):
            rel = sorted(tuple(colors[x] - S.offsets[s] for s, x in zip(prof, t)) for t in tuples)
            out.append(struct.pack(">I", len(rel)))
            for t in rel:
                out.append(struct.pack(f">{len(t)}H", *t))
        return b"".join(out)

    def orbit_reps(self, cell: list[int], prefix: list[int]) -> list[int]:
        gens = [a for a in self.autos if all(a[p] == p for p in prefix)]
        if not gens:
            return cell
        parent = {v: v for v in cell}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for a in gens:
            for v in cell:
                w = a[v]
                if w in parent:
                    rv, rw = find(v), find(w)
                    if rv != rw:
                        parent[max(rv, rw)] = min(rv, rw)
        return [v for v in cell if find(v) == v]

    def search(self, colors: list[int], prefix: list[int]) -> None:
        cells: dict[int, list[int]] = {}
        for g, c in enumerate(colors):
            cells.setdefault(c, []).append(g)
        target = next((cells[c] for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            self.leaf(colors)
            return
        done: list[int] = []
        for v in target:
            if done and v not in self.orbit_reps(target, prefix):
                continue
            ind = [2 * c + (0 if g == v else 1) for g, c in enumerate(colors)]
            self.search(self.refine(ind), prefix + [v])
            done.append(v)

    def leaf(self, colors: list[int]) -> None:
        code = self.leaf_code(colors)
        if self.first is None:
            self.first, self.first_leaf = code, colors
        elif code == self.first:
            self._auto(self.first_leaf, colors)
        if self.best is None or code < self.best:
            self.best, self.best_leaf = code, colors
        elif code == self.best and self.best_leaf is not colors:
            self._auto(self.best_leaf, colors)

    def _auto(self, ref: list[int], leaf: list[int]) -> None:
        pos = {c: g for g, c in enumerate(ref)}
        a = [pos[leaf[g]] for g in range(self.n)]
        if any(a[g] != g for g in range(self.n)):
            self.autos.append(a)

    def run(self) -> tuple[bytes, list[int]]:
        colors = self.refine(list(self.S.sort_of))
        self.search(colors, [])
        if self.best is None:  # empty structure
            self.best, self.best_leaf = self.leaf_code([]), []
        return self.best, self.best_leaf


def canonical_labeling(S: Structure) -> tuple[CanonicalCode, list[int]]:
    """Canonical code and a labeling ``global id -> canonical global position``."""
    return _Canon(S).run()


def canonical_form(S: Structure) -> CanonicalCode:
    """Isomorphism-invariant byte code; equal codes iff isomorphic."""
    code = S.__dict__.get("_canon")
    if code is None:
        code = S.__dict__["_canon"] = _Canon(S).run()[0]
    return code


def canonical_structure(S: Structure) -> Structure:
    """The canonically relabeled copy of ``S``."""
    _, lab = canonical_labeling(S)
    perms = []
    for s, n in enumerate(S.sizes):
        o = S.offsets[s]
        perms.append([lab[o + x] - o for x in range(n)])
    return S.relabel(perms)


def automorphisms_generators(S: Structure) -> list[list[int]]:
    c = _Canon(S)
    c.run()
    return c.autos


def are_isomorphic(S1: Structure, S2: Structure) -> bool:
    S1.same_signature(S2)
    if S1.sizes != S2.sizes:
        return False
    if [len(r) for r in S1.relations] != [len(r) for r in S2.relations]:
        return False
    return canonical_form(S1) == canonical_form(S2)


def reduct(S: Structure, signature: Signature) -> Structure:
    """Forget every relation not in ``signature`` (matched by name)."""
    if signature.sorts != S.signature.sorts:
        raise SignatureMismatch("reduct must keep the sorts")
    rels = []
    for r in signature.relations:
        own = S.signature.relation(r.name)
        if own != r:
            raise SignatureMismatch(f"relation {r.name} differs from the structure's")
        rels.append(S.rel(r.name))
    return Structure(signature, S.sizes, tuple(rels))


def rename_relations(S: Structure, mapping: Mapping[str, str]) -> Structure:
    sig = S.signature
    rels = tuple(RelationSymbol(mapping.get(r.name, r.name), r.arity, r.profile) for r in sig.relations)
    return Structure(Signature(sig.sorts, rels), S.sizes, S.relations)
