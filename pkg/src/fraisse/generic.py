"""Finite approximations of generic models and bounded Ramsey-witness search."""

from __future__ import annotations

import itertools
import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .classes import ClassSpec, default_extension, enumerate_members, is_member, one_point_extensions
from .kernels import first_bad_colouring
from .structures import Embedding, Structure, empty_structure, iter_embeddings_global


class BudgetExceeded(RuntimeError):
    """A search outgrew its configured budget (not a mathematical verdict)."""


# ------------------------------------------------------ extension requirements
@dataclass(frozen=True)
class _ReqType:
    A: Structure
    B: Structure  # A plus one new element
    sort: int
    new: int  # global id of the new element in B
    # (relation index, tuple of B-global ids, holds in B) for tuples through ``new``
    pattern: tuple


def _pattern(B: Structure, new: int) -> tuple:
    out = []
    profs = B.signature.profiles
    for j, prof in enumerate(profs):
        pools = [[g for g in range(B.size) if B.sort_of[g] == s] for s in prof]
        for t in itertools.product(*pools):
            if new in t:
                out.append((j, t, t in B.global_relations[j]))
    return tuple(out)


def _requirement_types(K: ClassSpec, k: int) -> list[_ReqType]:
    out = []
    for n in range(k + 1):
        for A in enumerate_members(K, n):
            for sort in range(len(K.signature.sorts)):
                for B in one_point_extensions(K, A, sort, filtered=K.hereditary):
                    if not K.hereditary and not is_member(K, B):
                        continue
                    new = B.offsets[sort] + B.sizes[sort] - 1
                    out.append(_ReqType(A, B, sort, new, _pattern(B, new)))
    return out


def _a_to_b(rt: _ReqType) -> list[int]:
    """Global ids of A's elements inside B (new element appended to its sort)."""
    return [g + 1 if rt.A.sort_of[g] > rt.sort else g for g in range(rt.A.size)]


def _witnessed_by(rt: _ReqType, amap: list[int], e: tuple[int, ...], S: Structure, s: int) -> bool:
    if S.sort_of[s] != rt.sort or s in e:
        return False
    inv = {b: e[i] for i, b in enumerate(amap)}
    inv[rt.new] = s
    rels = S.global_relations
    return all((tuple(inv[x] for x in t) in rels[j]) == val for j, t, val in rt.pattern)


def _forced(rt: _ReqType, amap: list[int], e: tuple[int, ...], S: Structure) -> dict:
    """Tuples a new point must (not) realise, as ``(j, local tuple) -> bool`` in ``S + new``."""
    inv = {b: S.to_local(e[i])[1] for i, b in enumerate(amap)}
    inv[rt.new] = S.sizes[rt.sort]
    return {(j, tuple(inv[x] for x in t)): val for j, t, val in rt.pattern}


def _add_point(K: ClassSpec, S: Structure, sort: int, forced: dict) -> Structure | None:
    fin = [key for key, v in forced.items() if v]
    fout = [key for key, v in forced.items() if not v]
    return default_extension(K, S, sort, fin, fout)


def _enrich(K: ClassSpec, S: Structure, sort: int, forced: dict) -> tuple[dict, Structure]:
    """Switch on unconstrained tuples through the new point by a fixed bit pattern.

    An all-absent default makes every new point nearly isolated, and each one
    then spawns requirements only further points can meet.  A pseudo-random
    but fixed choice (crc32 of the tuple) keeps the construction seedless.
    """
    T = _add_point(K, S, sort, forced)
    sizes = T.sizes
    new = sizes[sort] - 1
    sig = K.signature
    for j, prof in enumerate(sig.profiles):
        if sort not in prof or K.kind(sig.relations[j].name) == "order":
            continue
        sym = K.kind(sig.relations[j].name) == "hyperedge"
        seen = set()
        for t in itertools.product(*(range(sizes[s]) for s in prof)):
            if not any(s == sort and x == new for s, x in zip(prof, t)):
                continue
            if sym:
                if len(set(t)) != len(t) or frozenset(t) in seen:
                    continue
                seen.add(frozenset(t))
                keys = [(j, p) for p in itertools.permutations(t)]
            else:
                keys = [(j, t)]
            if any(key in forced for key in keys):
                continue
            if zlib.crc32(repr((S.size, j, sorted(t) if sym else t)).encode()) & 1:
                trial = {**forced, keys[0]: True}
                T2 = _add_point(K, S, sort, trial)
                if T2 is not None:
                    forced, T = trial, T2
    return forced, T


def _shift(e: tuple[int, ...], S: Structure, sort: int) -> tuple[int, ...]:
    # a point appended to ``sort`` shifts global ids of later sorts
    return tuple(g + 1 if S.sort_of[g] > sort else g for g in e)


def build_generic(K: ClassSpec, k: int, budget: int = 256, start: Structure | None = None) -> Structure:
    """Deterministic member of K with the k-extension property.

    Unmet one-point requirements (A, B = A + p, embedding A -> S) are kept in
    a sorted worklist.  Each round adds one point realising the least one and,
    greedily, every later requirement compatible with it.  ``budget`` caps the
    number of elements; :class:`BudgetExceeded` is raised beyond it.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    types = _requirement_types(K, k)
    amaps = [_a_to_b(rt) for rt in types]
    S = start if start is not None else empty_structure(K.signature)
    if start is not None and not is_member(K, start):
        raise ValueError("start structure is not a member")

    def unmet_for(S: Structure, ti: int, embs) -> list:
        rt, am = types[ti], amaps[ti]
        cands = [s for s in range(S.size) if S.sort_of[s] == rt.sort]
        return [
            (ti, e) for e in embs if not any(_witnessed_by(rt, am, e, S, s) for s in cands)
        ]

    pending: list = []
    for ti, rt in enumerate(types):
        pending.extend(unmet_for(S, ti, iter_embeddings_global(rt.A, S)))
    pending.sort()

    while pending:
        if S.size >= budget:
            raise BudgetExceeded(f"generic approximation exceeded {budget} elements")
        ti, e = pending[0]
        sort = types[ti].sort
        forced = _forced(types[ti], amaps[ti], e, S)
        T = _add_point(K, S, sort, forced)
        if T is None:  # cannot happen for a member requirement; guard anyway
            raise RuntimeError("requirement not realisable")
        for tj, e2 in pending[1:]:
            if types[tj].sort != sort:
                continue
            f2 = _forced(types[tj], amaps[tj], e2, S)
            if any(forced.get(key, v) != v for key, v in f2.items()):
                continue
            merged = {**forced, **f2}
            T2 = _add_point(K, S, sort, merged)
            if T2 is not None:
                forced, T = merged, T2
        forced, T = _enrich(K, S, sort, forced)
        w = T.offsets[sort] + T.sizes[sort] - 1
        survivors = []
        for tj, e2 in pending:
            e2s = _shift(e2, S, sort)
            if not _witnessed_by(types[tj], amaps[tj], e2s, T, w):
                survivors.append((tj, e2s))
        S = T
        for tj, rt in enumerate(types):
            embs = []
            for i in range(rt.A.size):
                if rt.A.sort_of[i] == S.sort_of[w]:
                    embs.extend(iter_embeddings_global(rt.A, S, partial={i: w}))
            survivors.extend(unmet_for(S, tj, embs))
        survivors.sort()
        pending = survivors
    return S


@dataclass
class ExtensionReport:
    k: int
    holds: bool
    A: Structure | None = None
    B: Structure | None = None
    embedding: Embedding | None = None  # A -> S with no extension to B
    inclusion: tuple[int, ...] = ()  # A -> B, global ids
    checked: int = 0

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "fails"

    def recheck(self, S: Structure) -> bool:
        """True iff the failing instance really has no extension."""
        if self.holds:
            return False
        gm = self.embedding.global_map
        partial = {self.inclusion[i]: gm[i] for i in range(self.A.size)}
        return next(iter_embeddings_global(self.B, S, partial=partial), None) is None


def verify_extension_property(S: Structure, K: ClassSpec, k: int) -> ExtensionReport:
    """Exhaustive check: every embedding of A into S extends to B (A <= B in K, |B| <= k+1).

    The one-point form is checked, which is equivalent (extend one element at a time).
    """
    if not is_member(K, S):
        raise ValueError("structure is not a member of the class")
    count = 0
    for rt in _requirement_types(K, k):
        am = _a_to_b(rt)
        cands = [s for s in range(S.size) if S.sort_of[s] == rt.sort]
        for e in iter_embeddings_global(rt.A, S):
            count += 1
            if not any(_witnessed_by(rt, am, e, S, s) for s in cands):
                # the B-side view: A sits inside B at positions ``am``
                maps = []
                for srt, n in enumerate(rt.A.sizes):
                    o = rt.A.offsets[srt]
                    maps.append(tuple(S.to_local(e[o + x])[1] for x in range(n)))
                return ExtensionReport(
                    k, False, A=rt.A, B=rt.B, embedding=Embedding(rt.A, S, tuple(maps)),
                    inclusion=tuple(am), checked=count,
                )
    return ExtensionReport(k, True, checked=count)


# ------------------------------------------------------------------- Ramsey
@dataclass
class RamseyResult:
    C: Structure | None
    skipped: list = field(default_factory=list)
    examined: int = 0


def colour_copies(A: Structure, B: Structure, C: Structure):
    """Embeddings of A into C and, per embedding of B into C, the indices of its A-copies."""
    embA = list(iter_embeddings_global(A, C))
    index = {e: i for i, e in enumerate(embA)}
    inner = list(iter_embeddings_global(A, B))
    copies = set()
    for u in iter_embeddings_global(B, C):
        copies.add(tuple(sorted(index[tuple(u[x] for x in a)] for a in inner)))
    return embA, sorted(copies), inner


def is_ramsey_witness(A: Structure, B: Structure, C: Structure, k: int, use_numba=None) -> bool:
    """Every k-colouring of Emb(A, C) has a copy of B with constant colour on its A-copies."""
    embA, copies, inner = colour_copies(A, B, C)
    if not copies:
        return False
    if not inner:
        return True
    if not embA:
        return False
    return first_bad_colouring(np.array(copies, dtype=np.int64), len(embA), k, use_numba) is None


def ramsey_witness_search(
    K: ClassSpec,
    A: Structure,
    B: Structure,
    k: int,
    max_size: int,
    budget_bits: float = 24.0,
    use_numba=None,
) -> RamseyResult:
    """Least C in K (by size, then canonical code) with C -> (B)^A_k.

    Candidates whose colouring space exceeds ``budget_bits`` are skipped and
    listed; if nothing is found and anything was skipped, BudgetExceeded is raised.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not (is_member(K, A) and is_member(K, B)):
        raise ValueError("A and B must be members of the class")
    res = RamseyResult(None)
    bits = math.log2(k)
    for n in range(B.size, max_size + 1):
        for C in enumerate_members(K, n):
            res.examined += 1
            embA, copies, inner = colour_copies(A, B, C)
            if not copies:
                continue
            if not inner:
                res.C = C
                return res
            if len(embA) * bits > budget_bits:
                res.skipped.append(C)
                continue
            if first_bad_colouring(np.array(copies, dtype=np.int64), len(embA), k, use_numba) is None:
                res.C = C
                return res
    if res.skipped:
        raise BudgetExceeded(f"{len(res.skipped)} candidate(s) exceeded the colouring budget")
    return res
