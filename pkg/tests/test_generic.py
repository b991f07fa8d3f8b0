import pytest

from fraisse.catalog import get_class, hypergraphs, linear_orders, pure_sets
from fraisse.classes import is_member
from fraisse.generic import (
    BudgetExceeded,
    build_generic,
    ramsey_witness_search,
    verify_extension_property,
)
from fraisse.structures import are_isomorphic
from helpers import chain, cycle, graph
from oracles import all_colourings_have_mono_copy

H2 = hypergraphs(2)


def _nbrs(S, v):
    return {b for a, b in S.relations[0] if a == v}


def test_generic_h2_level1_has_neighbour_and_non_neighbour():
    S = build_generic(H2, 1)
    assert is_member(H2, S)
    for v in range(S.size):
        nb = _nbrs(S, v)
        assert nb and len(nb) < S.size - 1


def test_generic_h2_level2():
    S = build_generic(H2, 2)
    assert is_member(H2, S)
    assert verify_extension_property(S, H2, 2).holds
    # monotone in k
    assert verify_extension_property(S, H2, 1).holds
    assert verify_extension_property(S, H2, 0).holds


def test_generic_is_deterministic():
    assert build_generic(H2, 2) == build_generic(H2, 2)


def test_generic_lo_level0_and_budget():
    S = build_generic(linear_orders(), 0)
    assert S.size == 1
    # a finite order always has an unrealised gap at level 1
    with pytest.raises(BudgetExceeded):
        build_generic(linear_orders(), 1, budget=12)


def test_generic_other_classes():
    for K, k in ((pure_sets(), 2), (get_class("H", [2, 3]), 1), (get_class("Hstar", [2]), 1)):
        S = build_generic(K, k)
        assert is_member(K, S)
        assert verify_extension_property(S, K, k).holds


def test_triangle_fails_level1():
    K3 = graph(3, [(0, 1), (1, 2), (0, 2)])
    rep = verify_extension_property(K3, H2, 1)
    assert rep.verdict == "fails"
    assert rep.recheck(K3)


def test_five_cycle_holds_level1():
    C5 = cycle(5)
    assert verify_extension_property(C5, H2, 1).holds
    # direct oracle: every vertex has a neighbour and a non-neighbour
    assert all(0 < len(_nbrs(C5, v)) < 4 for v in range(5))


def test_level0_base_case():
    assert verify_extension_property(graph(1, []), H2, 0).holds
    assert not verify_extension_property(graph(0, []), H2, 0).holds


def test_verify_rejects_non_member():
    with pytest.raises(ValueError):
        verify_extension_property(graph(3, [(0, 1), (1, 2), (0, 2)]), get_class("H", [2, 3]), 1)


@pytest.mark.parametrize("k,n", [(2, 3), (3, 4)])
def test_ramsey_lo(k, n):
    res = ramsey_witness_search(linear_orders(), chain(1), chain(2), k, 6)
    assert res.C is not None and are_isomorphic(res.C, chain(n))
    assert all_colourings_have_mono_copy(chain(1), chain(2), res.C, k)
    assert not all_colourings_have_mono_copy(chain(1), chain(2), chain(n - 1), k)


def test_ramsey_single_vertex():
    res = ramsey_witness_search(H2, graph(1, []), graph(1, []), 5, 3)
    assert res.C == graph(1, [])


def test_ramsey_absent_and_budget():
    res = ramsey_witness_search(linear_orders(), chain(1), chain(2), 3, 3)
    assert res.C is None and not res.skipped
    with pytest.raises(BudgetExceeded):
        ramsey_witness_search(linear_orders(), chain(1), chain(2), 3, 4, budget_bits=4.0)


def test_ramsey_rejects_non_members():
    with pytest.raises(ValueError):
        ramsey_witness_search(get_class("H", [2, 3]), graph(1, []), graph(3, [(0, 1), (1, 2), (0, 2)]), 2, 4)
