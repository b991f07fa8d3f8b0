"""Hereditarily finite sets and the membership encoding of finite structures.

Conventions: von Neumann numerals, Kuratowski pairs ``(a, b) = {{a}, {a, b}}``
and right-nested tuples ``(x0, x1, .., xk) = (x0, (x1, .., xk))``; a
1-tuple is its only entry.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .structures import Structure


class HFSet(frozenset):
    """A hereditarily finite set: a frozenset whose members are HFSets."""

    def __repr__(self) -> str:
        if not self:
            return "{}"
        return "{" + ", ".join(sorted(map(repr, self))) + "}"

    @property
    def rank(self) -> int:
        return 1 + max((c.rank for c in self), default=-1)


EMPTY = HFSet()


def numeral(n: int) -> HFSet:
    """Von Neumann numeral ``n = {0, .., n-1}``."""
    if n < 0:
        raise ValueError("numerals are non-negative")
    out = EMPTY
    for _ in range(n):
        out = HFSet(out | {out})
    return out


def pair(a: HFSet, b: HFSet) -> HFSet:
    return HFSet({HFSet({a}), HFSet({a, b})})


def hf_tuple(xs: Sequence[HFSet]) -> HFSet:
    if not xs:
        return EMPTY
    if len(xs) == 1:
        return xs[0]
    return pair(xs[0], hf_tuple(xs[1:]))


@dataclass(frozen=True)
class HFTheta:
    """``tuple(x0.0, .., x{r-1}.0) in x0.(index+1)``."""

    index: int
    arity: int

    def holds(self, blocks: Sequence[Sequence[HFSet]]) -> bool:
        if len(blocks) != self.arity:
            raise ValueError("wrong number of blocks")
        return hf_tuple([b[0] for b in blocks]) in blocks[0][self.index + 1]

    def __str__(self) -> str:
        args = ", ".join(f"x{i}.0" for i in range(self.arity))
        return f"({args}) in x0.{self.index + 1}"


@dataclass(frozen=True)
class HFEncoding:
    u: tuple[tuple[HFSet, ...], ...]  # per element an (n+1)-tuple of sets
    thetas: tuple[HFTheta, ...]

    @property
    def width(self) -> int:
        return len(self.thetas) + 1


def hf_encode(B: Structure) -> HFEncoding:
    """``u(b) = (u0(b), u0[R_0], .., u0[R_{n-1}])`` with ``u0`` the numeral map."""
    if not B.signature.is_one_sorted:
        raise ValueError("hf_encode expects a one-sorted structure")
    u0 = [numeral(b) for b in range(B.size)]
    images = tuple(HFSet(hf_tuple([u0[x] for x in t]) for t in R) for R in B.relations)
    u = tuple((u0[b],) + images for b in range(B.size))
    thetas = tuple(HFTheta(i, r.arity) for i, r in enumerate(B.signature.relations))
    return HFEncoding(u, thetas)


def hf_check(thetas: Sequence[HFTheta], u: Sequence[Sequence[HFSet]], B: Structure) -> bool:
    """``B |= R_i(b)  <=>  theta_i(u(b_0), ..)`` for every relation and tuple."""
    if len(set(map(tuple, u))) != len(u):
        return False
    for th, R in zip(thetas, B.relations):
        for t in itertools.product(range(B.size), repeat=th.arity):
            if (t in R) != th.holds([u[x] for x in t]):
                return False
    return True
