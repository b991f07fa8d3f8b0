import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraisse.catalog import get_class, hypergraphs, linear_orders, multi_order, parse_class, pure_sets
from fraisse.classes import Builtin, ClassSpec, enumerate_members, is_member, members_up_to
from fraisse.constructions import (
    Interpretation,
    chain_gap,
    chain_witness,
    code_order,
    compose,
    compose_results,
    contains_clique,
    encode_society,
    half_hypergraph,
    hypergraph_witness,
    identity_interpretation,
    lift_arity,
    one_sort_back,
    one_sort_forward,
    order_expansion,
    product_structure,
    remove_cliques,
    search_interpretation,
    society_signature,
    verify_witness,
)
from fraisse.logic import evaluate
from fraisse.structures import RelationSymbol, Signature, SignatureMismatch, Structure, are_isomorphic, qf_type, rename_relations
from helpers import GRAPH, chain, cycle, graph
from oracles import has_clique

H2 = hypergraphs(2)


# ------------------------------------------------------------------ witnesses
def test_identity_interpretation():
    G = cycle(5)
    I = identity_interpretation(GRAPH)
    assert verify_witness(I, G, G, [(x,) for x in range(5)])


def _half_graph_chain(n):
    S, aa = half_hypergraph(2, n)
    return S, aa


def test_half_graph_codes_a_chain():
    LO = linear_orders()
    I = Interpretation.make(LO.signature, GRAPH, 2, {"<0": "R(x0.0, x1.1)"})
    S, aa = _half_graph_chain(4)
    assert S.size == 8
    assert verify_witness(I, chain(4), S, aa)
    swapped = list(aa)
    swapped[1], swapped[2] = swapped[2], swapped[1]
    assert not verify_witness(I, chain(4), S, swapped)
    # direct tuple oracle
    for i, j in itertools.product(range(4), repeat=2):
        assert ((aa[i][0], aa[j][1]) in S.relations[0]) == (i < j)


def test_verify_witness_errors():
    I = identity_interpretation(GRAPH)
    G = graph(2, [(0, 1)])
    with pytest.raises(ValueError):
        verify_witness(I, G, G, [(0,), (0,)])
    with pytest.raises(ValueError):
        verify_witness(I, G, G, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        verify_witness(I, G, G, [(0,), (7,)])


def test_interpretation_validation():
    with pytest.raises(ValueError):
        Interpretation.make(GRAPH, GRAPH, 1, {"R": "R(x0.0, x1.0, x2.0)"})


# --------------------------------------------------------------- lift_arity
def test_lift_examples():
    K3 = graph(3, [(0, 1), (1, 2), (0, 2)])
    res = lift_arity(K3, 3)
    assert res.target.size == 4 and len(res.target.relations[0]) == 18
    assert res.verify()
    empty = lift_arity(graph(2, []), 4)
    assert empty.target.size == 4 and not empty.target.relations[0]
    one = lift_arity(graph(2, [(0, 1)]), 3)
    assert one.target.size == 3 and len(one.target.relations[0]) == 6
    with pytest.raises(ValueError):
        lift_arity(K3, 2)


@pytest.mark.parametrize("r2", [3, 4])
def test_lift_all_small_graphs(r2):
    K = hypergraphs(r2)
    for B in members_up_to(H2, 5):
        res = lift_arity(B, r2)
        assert is_member(K, res.target)
        assert res.verify() and res.verify(use_numba=False)


# ----------------------------------------------------------- remove_cliques
def test_remove_cliques_examples():
    K3 = graph(3, [(0, 1), (1, 2), (0, 2)])
    res = remove_cliques(K3, 3)
    assert res.target.size == 6 and res.verify()
    assert not any(
        all(p in res.target.relations[0] for p in itertools.combinations(X, 2))
        for X in itertools.combinations(range(6), 3)
    )
    v = remove_cliques(graph(1, []), 4)
    assert v.target.size == 3 and not v.target.relations[0]
    e = remove_cliques(graph(2, [(0, 1)]), 4)
    assert e.target.size == 6
    # fibre of b is {3b, 3b+1, 3b+2}; edges join different fibres at different levels
    want = {(a, b) for a in range(3) for b in range(3, 6) if a != b - 3}
    want |= {(b, a) for a, b in want}
    assert e.target.relations[0] == want
    with pytest.raises(ValueError):
        remove_cliques(K3, 2)


@pytest.mark.parametrize("r,k", [(2, 3), (2, 4), (3, 4)])
def test_remove_cliques_small(r, k):
    target = get_class("H", [r, k])
    for B in members_up_to(hypergraphs(r), 4):
        res = remove_cliques(B, k)
        assert res.verify()
        assert not contains_clique(res.target, k) and not has_clique(res.target, k)
        assert is_member(target, res.target)


def test_composition_lift_then_remove():
    for B in members_up_to(H2, 3):
        first = lift_arity(B, 3)
        second = remove_cliques(first.target, 4)
        both = compose_results(first, second)
        assert both.interp.m == first.interp.m * second.interp.m
        assert both.verify()
        assert is_member(get_class("H", [3, 4]), both.target)


def test_compose_requires_chaining():
    with pytest.raises(SignatureMismatch):
        compose(identity_interpretation(GRAPH), identity_interpretation(Signature.one_sorted([("Q", 2)])))


# ------------------------------------------------------------------ societies
def test_society_examples():
    sig = society_signature("P/2,Q/2")
    C = Structure.build(sig, 3, {"P": [(0, 1), (1, 0)], "Q": [(1, 2), (2, 1)]})
    res = encode_society(C)
    assert res.interp.m == 4 and res.target.size == 12 and res.verify()
    single = Structure.build(society_signature("R/2"), 3, {"R": [(0, 1), (1, 0)]})
    assert encode_society(single).verify()
    sig = society_signature("P/2,Q/3")
    C = Structure.build(sig, 3, {"P": [(0, 1), (1, 0)], "Q": list(itertools.permutations(range(3)))})
    res = encode_society(C)
    assert res.interp.m == 5 and res.target.size == 15 and res.verify()
    # no theta fires on a tuple of the wrong relation
    for name, th in res.interp.thetas:
        rel = sig.relation(name)
        for t in itertools.product(range(3), repeat=rel.arity):
            assert evaluate(th, res.target, [res.u[x] for x in t]) == (t in C.rel(name))


def test_society_rejects_non_society():
    with pytest.raises(ValueError):
        encode_society(Structure.build(society_signature("P/2"), 2, {"P": [(0, 1)]}))
    with pytest.raises(ValueError):
        society_signature("P/1")


@pytest.mark.parametrize("spec", ["P/2,Q/2", "P/2,Q/3"])
def test_society_small(spec):
    r = max(int(x.split("/")[1]) for x in spec.split(","))
    for C in members_up_to(parse_class(f"society[{spec}]"), 3):
        res = encode_society(C)
        assert res.verify() and is_member(hypergraphs(r), res.target)


# --------------------------------------------------------------- order coding
def test_op_witnesses_verify():
    for r in (2, 3, 4):
        assert all(hypergraph_witness(r).verify(n) for n in range(1, 6))
    assert all(chain_witness(["<0", "<1"]).verify(n) for n in range(1, 6))


def test_code_order_examples():
    K = H2
    KO = order_expansion(K)
    sig = KO.signature
    B = Structure.build(sig, 2, {"R": [(0, 1), (1, 0)], "<": [(0, 1)]})
    res = code_order(B, K, hypergraph_witness(2))
    assert res.interp.m == 3 and res.target.size <= 6 and res.verify()
    one = code_order(Structure.build(sig, 1, {}), K, hypergraph_witness(2))
    assert one.target.size <= 3 and one.verify()
    H3 = hypergraphs(3)
    B3 = Structure.build(order_expansion(H3).signature, 2, {"<": [(1, 0)]})
    assert code_order(B3, H3, hypergraph_witness(3)).verify()


@pytest.mark.parametrize("r", [2, 3])
def test_code_order_small(r):
    K = hypergraphs(r)
    w = hypergraph_witness(r)
    for B in members_up_to(order_expansion(K), 3):
        res = code_order(B, K, w)
        assert is_member(K, res.target) and res.verify()


def test_order_expansion_examples():
    OH = order_expansion(H2)
    assert len(enumerate_members(OH, 2)) == 2
    OL = order_expansion(linear_orders())
    MO2 = multi_order(2)
    assert OL.signature == MO2.signature
    for n in range(4):
        assert len(enumerate_members(OL, n)) == len(enumerate_members(MO2, n))
    OP = order_expansion(pure_sets())
    assert [len(enumerate_members(OP, n)) for n in range(5)] == [1, 1, 1, 1, 1]
    with pytest.raises(ValueError):
        order_expansion(ClassSpec(Signature.one_sorted([("<", 2)]), ()), name="<")


# ------------------------------------------------------------------- products
def test_product_examples():
    A = chain(2, "<0")
    B = chain(2, "<1")
    P = product_structure([A, B])
    assert P.size == 4
    # <0 holds when the first coordinates are ordered: 1 * 2 * 2 pairs
    assert len(P.rel("<0")) == 4
    single = Structure.build(Signature.one_sorted([("U", 1)]), 1, {})
    AP = product_structure([A, single])
    assert AP.size == 2 and AP.rel("<0") == A.relations[0] and not AP.rel("U")
    empty = Structure.build(Signature.one_sorted([("U", 1)]), 0, {})
    assert product_structure([empty, A]).size == 0
    with pytest.raises(SignatureMismatch):
        product_structure([A, A])


def test_product_type_determination_lo_lo():
    L0, L1 = linear_orders(), ClassSpec(Signature.one_sorted([("<1", 2)]), (Builtin("linear_order", ("<1",)),))
    for A in members_up_to(L0, 3):
        for B in members_up_to(L1, 3):
            _check_type_determination(A, B, 3, both_ways=True)


def test_product_coordinate_types_determine_product_type():
    for A in members_up_to(H2, 3):
        for B in members_up_to(hypergraphs(3), 3):
            _check_type_determination(A, rename_relations(B, {"R": "S"}), 3, both_ways=False)


def test_product_type_loses_equality_without_order():
    # edgeless factors cannot see whether two pairs share a coordinate
    A, B = graph(2, []), rename_relations(graph(2, []), {"R": "S"})
    P = product_structure([A, B])
    assert qf_type(P, (0, 1)) == qf_type(P, (0, 3))
    assert qf_type(A, (0, 0)) != qf_type(A, (0, 1))


def _check_type_determination(A, B, k, both_ways):
    P = product_structure([A, B])
    coords = list(itertools.product(range(A.size), range(B.size)))
    seen = {}
    back = {}
    for n in range(1, k + 1):
        for t in itertools.product(range(P.size), repeat=n):
            tp = qf_type(P, t)
            parts = (qf_type(A, [coords[x][0] for x in t]), qf_type(B, [coords[x][1] for x in t]))
            assert back.setdefault(parts, tp) == tp
            if both_ways:
                assert seen.setdefault(tp, parts) == parts


# ---------------------------------------------------------------- one-sort
def _two_sorted():
    return Signature(("P", "L"), (RelationSymbol("I", 2, ("P", "L")),))


def test_one_sort_examples():
    sig = _two_sorted()
    B = Structure.build(sig, (1, 1), {"I": [(0, 0)]})
    res = one_sort_forward(B)
    assert res.A.size == 2
    back = one_sort_back(res.A, res.types, sig)
    assert are_isomorphic(back, B)
    E = Structure.build(sig, (0, 0), {})
    assert one_sort_forward(E).A.size == 0
    J = Structure.build(sig, (2, 2), {"I": [(0, 0), (1, 0), (1, 1)]})
    r = one_sort_forward(J)
    assert are_isomorphic(one_sort_back(r.A, r.types, sig), J)


@pytest.mark.parametrize("expr", ["J[1]", "J[2]", "Hstar[2]", "H[2]", "MO[2]"])
def test_one_sort_round_trips(expr):
    K = parse_class(expr)
    for B in members_up_to(K, 3):
        res = one_sort_forward(B)
        back = one_sort_back(res.A, res.types, B.signature)
        assert are_isomorphic(back, B)
        # and the other direction: C = A_B gives A_{B^C} = C over the same type table
        again = one_sort_forward(back, res.types)
        assert are_isomorphic(again.A, res.A)


def test_one_sort_back_needs_partition():
    sig = _two_sorted()
    B = Structure.build(sig, (1, 1), {"I": [(0, 0)]})
    res = one_sort_forward(B)
    bad = Structure(res.A.signature, res.A.sizes, tuple(frozenset() for _ in res.A.relations))
    with pytest.raises(ValueError):
        one_sort_back(bad, res.types, sig)


# ---------------------------------------------------------------- chain gap
@pytest.mark.parametrize("r1,r2,m,N", [(2, 3, 1, 6), (2, 3, 2, 15), (2, 4, 1, 7)])
def test_chain_gap(r1, r2, m, N):
    g = chain_gap(r1, r2, m)
    assert g.N == N
    assert g.lhs == math.comb(N * m, r1) and g.rhs == math.comb(N, r2) and g.lhs < g.rhs
    assert not math.comb((N - 1) * m, r1) < math.comb(N - 1, r2)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(1, 3), st.integers(1, 3))
def test_chain_gap_minimal(r1, gap, m):
    r2 = r1 + gap
    g = chain_gap(r1, r2, m)
    assert g.lhs < g.rhs
    assert all(not math.comb(n * m, r1) < math.comb(n, r2) for n in range(1, g.N))


def test_chain_gap_errors():
    with pytest.raises(ValueError):
        chain_gap(3, 2, 1)
    with pytest.raises(ValueError):
        chain_gap(2, 3, 0)


# ------------------------------------------------------------------- search
def test_search_identity():
    res = search_interpretation(H2, H2, 1, 1, 3)
    assert str(res.interp.theta("R")) == "R(x0.0, x1.0)"


def test_search_lo_into_graphs():
    res = search_interpretation(linear_orders(), H2, 2, 2, 3)
    assert res is not None
    for B, C, u in res.witnesses:
        assert verify_witness(res.interp, B, C, u) and is_member(H2, C)


def test_search_bounds_checked():
    with pytest.raises(ValueError):
        search_interpretation(H2, H2, 0, 1, 1)
