import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraisse.catalog import get_class, parse_class
from fraisse.classes import is_member, members_up_to
from fraisse.constructions import lift_arity
from fraisse.io import (
    ParseError,
    format_class_spec,
    format_encoding,
    format_interpretation,
    format_signature,
    format_structure,
    parse_class_spec,
    parse_encoding,
    parse_interpretation,
    parse_signature,
    parse_structure,
    read_class_spec,
    write_structure,
)
from fraisse.structures import Signature
from helpers import graph
from oracles import random_signature, random_structure


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_structure_round_trip(seed):
    rng = random.Random(seed)
    S = random_structure(rng, random_signature(rng), 6)
    text = format_structure(S)
    assert parse_structure(text) == S
    assert format_structure(parse_structure(text)) == text


def test_signature_forms():
    assert parse_signature("none") == Signature.one_sorted([])
    assert parse_signature("R/2,Q/3") == Signature.one_sorted([("R", 2), ("Q", 3)])
    sig = parse_signature("sorts=A,B;R/2:A.B,U/1:A")
    assert sig.sorts == ("A", "B")
    assert parse_signature(format_signature(sig)) == sig
    for bad in ("R/x", "R", "sorts=A;R/2:A.C", "sorts=A;R/2:A"):
        with pytest.raises(ValueError):
            parse_signature(bad)


def test_structure_file_with_comments():
    S = parse_structure("# triangle\nsorts: V=3\nrels: R/2:V,V\nR: (0,1) (1,0) (1,2) (2,1)  # path\n")
    assert S == graph(3, [(0, 1), (1, 2)])


@pytest.mark.parametrize(
    "text,line",
    [
        ("sorts: V=2\nrels: R/2:V,V\nR: (0,5)\n", 3),
        ("sorts: V=2\nrels: R/2:V,V\nQ: (0,1)\n", 3),
        ("sorts: V=2\nrels: R/2:V,V\nR: (0,1,1)\n", 3),
        ("sorts: V=x\n", 1),
        ("rels: R/2:V,V\n", 1),
        ("sorts: V=2\nrels: R/2:W,V\n", 2),
        ("sorts: V=2\nrels: R/2:V,V\nR: (0,1\n", 3),
    ],
)
def test_structure_errors_carry_line(text, line):
    with pytest.raises(ParseError) as e:
        parse_structure(text, "f.str")
    assert e.value.line == line
    assert f"f.str:{line}:" in str(e.value)


def test_interpretation_round_trip_and_errors():
    I = lift_arity(graph(3, [(0, 1)]), 3).interp
    text = format_interpretation(I)
    J = parse_interpretation(text)
    assert format_interpretation(J) == text
    with pytest.raises(ParseError) as e:
        parse_interpretation("interp m=2 from=<0/2 to=R/2\ntheta <0: R(x0.0, x9.1)\n")
    assert e.value.line == 2
    with pytest.raises(ParseError):
        parse_interpretation("interp m=2 from=<0/2 to=R/2\n")
    with pytest.raises(ParseError):
        parse_interpretation("interp from=<0/2 to=R/2\n")
    with pytest.raises(ParseError):
        parse_interpretation("interp m=1 from=<0/2 to=R/2\ntheta Q: R(x0.0, x1.0)\n")


def test_encoding_round_trip_and_errors():
    res = lift_arity(graph(3, [(0, 1), (1, 2)]), 3)
    C, u = parse_encoding(format_encoding(res.target, res.u))
    assert C == res.target and u == tuple(map(tuple, res.u))
    body = format_structure(res.target)
    with pytest.raises(ParseError):
        parse_encoding(body)
    with pytest.raises(ParseError):
        parse_encoding(body + "map:\n0 -> (0)\n2 -> (1)\n")
    with pytest.raises(ParseError):
        parse_encoding(body + "map:\n0 -> 0\n")


def test_class_file(tmp_path):
    write_structure(graph(3, [(0, 1), (1, 2), (0, 2)]), tmp_path / "k3.str")
    (tmp_path / "tf.cls").write_text("# triangle-free\nclass tf sig R/2\n  builtin hyperedge R\n  forbid k3.str\n")
    K = read_class_spec(tmp_path / "tf.cls")
    assert K.name == "tf" and K.hereditary
    ref = get_class("H", [2, 3])
    for S in members_up_to(parse_class("H[2]"), 4):
        assert is_member(K, S) == is_member(ref, S)
    text = format_class_spec(K, ["k3.str"])
    again = parse_class_spec(text, tmp_path)
    assert again.builtins == K.builtins and again.forbidden == K.forbidden


def test_class_file_builtin_params_and_errors(tmp_path):
    K = parse_class_spec("class e2 sig R/2 builtin hyperedge R builtin max_edges R,2 nonhereditary")
    assert not K.hereditary
    assert K.builtins[1].params == ("R", 2)
    with pytest.raises(ParseError):
        parse_class_spec("klass x sig R/2")
    with pytest.raises(ParseError) as e:
        parse_class_spec("class x sig R/2\nforbid missing.str\n", tmp_path)
    assert e.value.line == 2
    with pytest.raises(ParseError):
        parse_class_spec("class x sig R/2 builtin nonsense")
    with pytest.raises(ParseError):
        parse_class_spec("class x sig R/2 wibble")
