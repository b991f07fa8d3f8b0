import itertools

import pytest

from fraisse.catalog import bounded_edges, get_class, hypergraphs, linear_orders, multi_order, parse_class
from fraisse.classes import (
    Builtin,
    ClassSpec,
    Forbidden,
    amalgamate,
    check_axiom,
    enumerate_members,
    factorization_window_check,
    is_member,
    members_up_to,
)
from fraisse.generic import build_generic
from fraisse.structures import Signature, SignatureMismatch, Structure, are_isomorphic, canonical_form, induced_substructure, rename_relations
from helpers import GRAPH, chain, graph
from oracles import (
    brute_isomorphic,
    graphs_with_few_edges,
    has_clique,
    jep_witness_exists,
    labeled_count,
    labeled_hypergraphs,
    labeled_linear_orders,
)

H2 = hypergraphs(2)


# ----------------------------------------------------------------- membership
def test_membership_examples():
    K3 = graph(3, [(0, 1), (1, 2), (0, 2)])
    assert is_member(H2, K3)
    assert not is_member(get_class("H", [2, 3]), K3)
    sig = Signature.one_sorted([("<0", 2)])
    cyc = Structure.build(sig, 3, {"<0": [(0, 1), (1, 2), (2, 0)]})
    assert not is_member(linear_orders(), cyc)
    assert is_member(linear_orders(), chain(3))


def test_membership_rejects_asymmetric_and_loops():
    assert not is_member(H2, Structure.build(GRAPH, 2, {"R": [(0, 1)]}))
    assert not is_member(H2, Structure.build(GRAPH, 1, {"R": [(0, 0)]}))


def test_membership_signature_mismatch():
    with pytest.raises(SignatureMismatch):
        is_member(H2, chain(2))


def test_forbidden_constraint_and_unknown_builtin():
    K = ClassSpec(GRAPH, (Builtin("hyperedge", ("R",)), Forbidden((graph(3, [(0, 1), (1, 2)]),))))
    assert not is_member(K, graph(4, [(0, 1), (1, 2)]))
    assert is_member(K, graph(4, [(0, 1), (2, 3)]))
    with pytest.raises(ValueError):
        ClassSpec(GRAPH, (Builtin("nonsense", ()),))


# ---------------------------------------------------------------- enumeration
@pytest.mark.parametrize("n,want", [(0, 1), (1, 1), (2, 2), (3, 4), (4, 11), (5, 34)])
def test_graph_counts(n, want):
    assert len(enumerate_members(H2, n)) == want
    if n <= 4:
        assert labeled_count(labeled_hypergraphs(2, n)) == want


def test_hypergraph_counts_match_labeled_filter():
    assert len(enumerate_members(hypergraphs(3), 4)) == 5 == labeled_count(labeled_hypergraphs(3, 4))
    tf = [G for G in labeled_hypergraphs(2, 4) if not has_clique(G, 3)]
    assert len(enumerate_members(get_class("H", [2, 3]), 4)) == 7 == labeled_count(tf)


def test_members_pairwise_non_isomorphic_and_exhaustive():
    reps = enumerate_members(H2, 4)
    for A, B in itertools.combinations(reps, 2):
        assert not brute_isomorphic(A, B)
    codes = {canonical_form(R) for R in reps}
    assert all(canonical_form(G) in codes for G in labeled_hypergraphs(2, 4))


@pytest.mark.parametrize("expr,n", [("LO", 4), ("MO[2]", 3), ("Hstar[2]", 3), ("J[1]", 3), ("ordered[H[2]]", 3)])
def test_catalog_enumeration_matches_labeled_filter(expr, n):
    K = parse_class(expr)
    reps = enumerate_members(K, n)
    assert all(is_member(K, R) for R in reps)
    for A, B in itertools.combinations(reps, 2):
        assert not are_isomorphic(A, B)
    if expr == "LO":
        assert len(reps) == labeled_count(labeled_linear_orders(n)) == 1
    if expr == "MO[2]":
        # pairs of orders up to relabeling: n! classes
        assert len(reps) == 6


def test_enumeration_is_deterministic():
    a = [canonical_form(S) for S in enumerate_members(hypergraphs(2), 4)]
    b = [canonical_form(S) for S in enumerate_members(hypergraphs(2), 4)]
    assert a == b == sorted(a)


@pytest.mark.parametrize("expr", ["H[2]", "H[2,3]", "LO", "MO[2]", "Hstar[2]", "society[P/2,Q/3]"])
def test_hereditary_closure(expr):
    K = parse_class(expr)
    for B in members_up_to(K, 4):
        for k in range(B.size + 1):
            for X in itertools.combinations(range(B.size), k):
                assert is_member(K, induced_substructure(B, X)[0])


# --------------------------------------------------------------------- axioms
def test_h2_disjoint_ap_bound_3():
    rep = check_axiom(H2, "disjoint-AP", 3)
    assert rep.holds and rep.verdict == "holds-up-to-3"


def test_lo_ap_bound_3():
    assert check_axiom(linear_orders(), "AP", 3).holds


@pytest.mark.parametrize("axiom", ["HP", "JEP", "AP", "disjoint-JEP", "disjoint-AP"])
def test_small_classes_bound_3(axiom):
    for K in (H2, multi_order(2), get_class("H", [2, 3])):
        assert check_axiom(K, axiom, 3).holds


def test_bad_axiom_and_bound():
    with pytest.raises(ValueError):
        check_axiom(H2, "XP", 3)
    with pytest.raises(ValueError):
        check_axiom(H2, "AP", 0)


def test_toy_jep_counterexample_at_4():
    K = bounded_edges(2)
    assert check_axiom(K, "JEP", 3).holds
    rep = check_axiom(K, "JEP", 4)
    assert rep.verdict == "counterexample"
    assert rep.recheck(K)
    # brute force over every graph with <= 2 edges on <= 6 vertices
    assert not jep_witness_exists(rep.B1, rep.B2, list(graphs_with_few_edges(6, 2)))


def test_non_disjoint_ap_identifies_points():
    # complete graphs only
    K = ClassSpec(GRAPH, (Builtin("hyperedge", ("R",)), Forbidden((graph(2, []),))), "cliques")
    assert check_axiom(K, "AP", 3).holds
    assert check_axiom(K, "disjoint-AP", 2).holds
    # two single vertices embed disjointly into an edge
    V = graph(1, [])
    assert amalgamate(K, V, V, (), (), disjoint=True) is not None


def test_amalgam_embeds_both_sides():
    B1 = graph(3, [(0, 1), (1, 2)])
    B2 = graph(3, [(0, 1)])
    res = amalgamate(H2, B1, B2, (0, 1), (0, 1), disjoint=True)
    C, g1, g2 = res
    assert is_member(H2, C)
    assert set(g1) & set(g2) == {g1[0], g1[1]}


# --------------------------------------------------------------- factorization
def test_factorization_identity_window():
    S = build_generic(H2, 1)
    assert factorization_window_check(H2, [H2], S, [S], [(x,) for x in range(S.size)], 2)


def test_factorization_collision_on_path():
    P = graph(3, [(0, 1), (1, 2)])
    L0, L1 = chain(3, "<0"), chain(3, "<1")
    # (0,1) is an edge, (0,2) is not, yet both map to increasing pairs in each order
    u = [(0, 0), (1, 1), (2, 2)]
    LO1 = ClassSpec(L1.signature, (Builtin("linear_order", ("<1",)),), "LO'")
    assert not factorization_window_check(H2, [linear_orders(), LO1], P, [L0, L1], u, 2)


def test_factorization_multi_order():
    MO2 = multi_order(2)
    sig = MO2.signature
    A = Structure.build(sig, 2, {"<0": [(0, 1)], "<1": [(1, 0)]})
    LO0 = linear_orders()
    LO1 = ClassSpec(Signature.one_sorted([("<1", 2)]), (Builtin("linear_order", ("<1",)),), "LO'")
    factors = [chain(2, "<0"), rename_relations(chain(2), {"<0": "<1"})]
    assert factorization_window_check(MO2, [LO0, LO1], A, factors, [(0, 1), (1, 0)], 2)


def test_factorization_errors():
    P = graph(2, [(0, 1)])
    with pytest.raises(ValueError):
        factorization_window_check(H2, [H2], P, [P], [(0,), (0,)], 2)
    with pytest.raises(ValueError):
        K3 = graph(3, [(0, 1), (1, 2), (0, 2)])
        factorization_window_check(get_class("H", [2, 3]), [H2], K3, [P], [(0,), (1,), (0,)], 2)
