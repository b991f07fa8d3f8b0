"""Command-line interface.

Every command prints a report whose last line is ``RESULT: <token>``.
Exit codes: 0 success, 1 negative verdict, 2 usage or input error,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Callable

from . import io
from .catalog import CatalogError, parse_class, witness_for
from .classes import AXIOMS, ClassSpec, check_axiom, enumerate_members, is_member
from .constructions import (
    EncodingResult,
    chain_gap,
    code_order,
    contains_clique,
    encode_society,
    lift_arity,
    one_sort_back,
    one_sort_forward,
    order_expansion,
    product_coordinates,
    product_structure,
    remove_cliques,
    search_interpretation,
    verify_witness,
)
from .generic import BudgetExceeded, build_generic, ramsey_witness_search, verify_extension_property
from .hf import hf_check, hf_encode
from .structures import are_isomorphic, canonical_form, rename_relations

OK, NEGATIVE, USAGE, BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        print("RESULT: USAGE")
        sys.exit(USAGE)


def _result(token, code: int = OK) -> int:
    print(f"RESULT: {token}")
    return code


def load_class(expr: str) -> ClassSpec:
    """A catalog expression such as ``H[2,3]``, or a path to a class file."""
    if Path(expr).is_file():
        return io.read_class_spec(expr)
    return parse_class(expr)


def _one_in(args) -> str:
    if not args.inputs or len(args.inputs) != 1:
        raise UsageError("exactly one --in file required")
    return args.inputs[0]


_DEST = {"class": "cls", "from": "source", "to": "target"}


def _need(args, *flags):
    for f in flags:
        if getattr(args, _DEST.get(f, f.replace("-", "_"))) is None:
            raise UsageError(f"--{f} is required")


def _show_encoding(res: EncodingResult, args) -> int:
    ok = res.verify()
    print(f"source size {res.source.size}, target size {res.target.size}, m={res.interp.m}")
    for name, th in res.interp.thetas:
        print(f"theta {name}: {th}")
    if args.out:
        io.write_encoding(res.target, res.u, args.out)
        print(f"wrote {args.out}")
    if args.interp_out:
        Path(args.interp_out).write_text(io.format_interpretation(res.interp), encoding="utf-8")
        print(f"wrote {args.interp_out}")
    return _result("PASS" if ok else "FAIL", OK if ok else NEGATIVE)


# ------------------------------------------------------------------ commands
def cmd_enumerate(args) -> int:
    _need(args, "class", "size")
    K = load_class(args.cls)
    members = enumerate_members(K, args.size)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    for i, S in enumerate(members):
        io.write_structure(S, out / f"member_{args.size}_{i:04d}.str")
    print(f"{len(members)} members of {K.name} with {args.size} elements written to {out}")
    return _result(len(members))


def cmd_check_member(args) -> int:
    _need(args, "class")
    K = load_class(args.cls)
    S = io.read_structure(_one_in(args))
    if is_member(K, S):
        return _result("MEMBER")
    return _result("NONMEMBER", NEGATIVE)


def cmd_check_axiom(args) -> int:
    _need(args, "class", "axiom", "bound")
    K = load_class(args.cls)
    rep = check_axiom(K, args.axiom, args.bound)
    print(f"{K.name} {args.axiom}: {rep.verdict} ({rep.instances} instances)")
    if rep.holds:
        return _result(rep.verdict)
    for label, X in (("A", rep.A), ("B1", rep.B1), ("B2", rep.B2)):
        if X is not None:
            print(f"[{label}]")
            print(io.format_structure(X), end="")
    for label, f in (("f1", rep.f1), ("f2", rep.f2)):
        if f is not None:
            print(f"{label}: {f.global_map}")
    print(f"recheck: {rep.recheck(K)}")
    return _result("COUNTEREXAMPLE", NEGATIVE)


def cmd_generic(args) -> int:
    _need(args, "class", "k")
    K = load_class(args.cls)
    S = build_generic(K, args.k, budget=args.budget or 256)
    print(f"{args.k}-extension structure for {K.name} with {S.size} elements")
    if args.out:
        io.write_structure(S, args.out)
        print(f"wrote {args.out}")
    else:
        print(io.format_structure(S), end="")
    return _result(S.size)


def cmd_verify_extension(args) -> int:
    _need(args, "class", "k")
    K = load_class(args.cls)
    S = io.read_structure(_one_in(args))
    rep = verify_extension_property(S, K, args.k)
    print(f"{rep.checked} embeddings checked")
    if rep.holds:
        return _result("HOLDS")
    print("[A]")
    print(io.format_structure(rep.A), end="")
    print("[B]")
    print(io.format_structure(rep.B), end="")
    print(f"A -> S: {rep.embedding.global_map}; A -> B: {rep.inclusion}")
    return _result("FAILS", NEGATIVE)


def cmd_ramsey(args) -> int:
    _need(args, "class", "colors", "size")
    if not args.inputs or len(args.inputs) != 2:
        raise UsageError("ramsey needs --in A.str --in B.str")
    K = load_class(args.cls)
    A, B = (io.read_structure(p) for p in args.inputs)
    bits = float(args.budget) if args.budget is not None else 24.0
    res = ramsey_witness_search(K, A, B, args.colors, args.size, budget_bits=bits)
    print(f"{res.examined} candidates examined, {len(res.skipped)} skipped")
    if res.C is None:
        return _result("NOTFOUND", NEGATIVE)
    if args.out:
        io.write_structure(res.C, args.out)
        print(f"wrote {args.out}")
    else:
        print(io.format_structure(res.C), end="")
    return _result(f"FOUND size={res.C.size}")


def cmd_verify_witness(args) -> int:
    _need(args, "interp", "encoding")
    interp = io.read_interpretation(args.interp)
    B = io.read_structure(_one_in(args))
    C, u = io.read_encoding(args.encoding)
    try:
        ok = verify_witness(interp, B, C, u)
    except ValueError as e:
        print(f"invalid witness: {e}")
        ok = False
    return _result("PASS" if ok else "FAIL", OK if ok else NEGATIVE)


def cmd_search_interp(args) -> int:
    _need(args, "from", "to", "m", "max-nodes", "size")
    K1, K2 = load_class(args.source), load_class(args.target)
    res = search_interpretation(K1, K2, args.m, args.max_nodes, args.size, budget=args.budget or 5_000_000)
    if res is None:
        print(f"no interpretation {K1.name} -> {K2.name} with m={args.m}, "
              f"max-nodes={args.max_nodes} on members of size <= {args.size}")
        return _result("NOTFOUND", NEGATIVE)
    print(f"found after {res.candidates_tried} candidates, witnessed on {len(res.witnesses)} members")
    text = io.format_interpretation(res.interp)
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    return _result("FOUND")


def cmd_lift_arity(args) -> int:
    _need(args, "r2")
    return _show_encoding(lift_arity(io.read_structure(_one_in(args)), args.r2), args)


def cmd_remove_cliques(args) -> int:
    _need(args, "k")
    res = remove_cliques(io.read_structure(_one_in(args)), args.k)
    print(f"target contains K_{args.k}: {contains_clique(res.target, args.k)}")
    return _show_encoding(res, args)


def cmd_encode_society(args) -> int:
    return _show_encoding(encode_society(io.read_structure(_one_in(args))), args)


def cmd_code_order(args) -> int:
    _need(args, "class")
    K = load_class(args.cls)
    w = witness_for(args.cls)
    return _show_encoding(code_order(io.read_structure(_one_in(args)), K, w), args)


def cmd_order_expand(args) -> int:
    _need(args, "class")
    K = order_expansion(load_class(args.cls))
    files = []
    if args.out:
        out = Path(args.out)
        for i, F in enumerate(K.forbidden):
            f = out.with_name(f"{out.stem}.forbid{i}.str")
            io.write_structure(F, f)
            files.append(f.name)
    text = io.format_class_spec(K, files)
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    if args.size is not None:
        print(f"{len(enumerate_members(K, args.size))} members with {args.size} elements")
    return _result(K.name)


def cmd_product(args) -> int:
    if not args.inputs or len(args.inputs) < 2:
        raise UsageError("product needs at least two --in files")
    Bs = [io.read_structure(p) for p in args.inputs]
    names = [n for B in Bs for n in B.signature.names()]
    if len(set(names)) != len(names):
        # factors must have disjoint signatures: tag every relation with its factor
        Bs = [rename_relations(B, {n: f"{n}_{i}" for n in B.signature.names()}) for i, B in enumerate(Bs)]
        print("relations renamed to <name>_<factor>")
    P = product_structure(Bs)
    for i, c in enumerate(product_coordinates(Bs)):
        print(f"{i} = {c}")
    if args.out:
        io.write_structure(P, args.out)
        print(f"wrote {args.out}")
    else:
        print(io.format_structure(P), end="")
    return _result(P.size)


def cmd_one_sort(args) -> int:
    B = io.read_structure(_one_in(args))
    res = one_sort_forward(B)
    for i, q in enumerate(res.types):
        print(f"T{i}: {q}")
    if args.out:
        io.write_structure(res.A, args.out)
        print(f"wrote {args.out}")
    else:
        print(io.format_structure(res.A), end="")
    back = one_sort_back(res.A, res.types, B.signature)
    ok = back == B
    print(f"round trip: {'identical' if ok else 'differs'}")
    return _result("ROUNDTRIP-OK" if ok else "ROUNDTRIP-FAIL", OK if ok else NEGATIVE)


def cmd_hf_encode(args) -> int:
    B = io.read_structure(_one_in(args))
    enc = hf_encode(B)
    for th in enc.thetas:
        print(f"theta: {th}")
    for b, t in enumerate(enc.u):
        print(f"{b} -> ({', '.join(map(repr, t))})")
    ok = hf_check(enc.thetas, enc.u, B)
    return _result("PASS" if ok else "FAIL", OK if ok else NEGATIVE)


def cmd_chain_gap(args) -> int:
    _need(args, "r1", "r2", "m")
    g = chain_gap(args.r1, args.r2, args.m)
    print(f"N={g.N}")
    print(f"C({g.N * args.m},{args.r1})={g.lhs}")
    print(f"C({g.N},{args.r2})={g.rhs}")
    return _result(g.N)


def cmd_canon(args) -> int:
    S = io.read_structure(_one_in(args))
    code = canonical_form(S)
    return _result(code.hex() if isinstance(code, bytes) else code)


def cmd_iso(args) -> int:
    if not args.inputs or len(args.inputs) != 2:
        raise UsageError("iso needs two --in files")
    A, B = (io.read_structure(p) for p in args.inputs)
    if are_isomorphic(A, B):
        return _result("ISOMORPHIC")
    return _result("NONISOMORPHIC", NEGATIVE)


COMMANDS: dict[str, tuple[Callable, str]] = {
    "enumerate": (cmd_enumerate, "write every member of a given size, up to isomorphism"),
    "check-member": (cmd_check_member, "test class membership"),
    "check-axiom": (cmd_check_axiom, "bounded HP/JEP/AP check"),
    "generic": (cmd_generic, "build a finite k-extension structure"),
    "verify-extension": (cmd_verify_extension, "check the k-extension property"),
    "ramsey": (cmd_ramsey, "bounded Ramsey witness search"),
    "verify-witness": (cmd_verify_witness, "check an interpretation witness"),
    "search-interp": (cmd_search_interp, "bounded interpretation search"),
    "lift-arity": (cmd_lift_arity, "encode an r1-hypergraph as an r2-hypergraph"),
    "remove-cliques": (cmd_remove_cliques, "encode a hypergraph without K_k"),
    "encode-society": (cmd_encode_society, "encode a society as a hypergraph"),
    "code-order": (cmd_code_order, "code an ordered member into the unordered class"),
    "order-expand": (cmd_order_expand, "class of ordered members"),
    "product": (cmd_product, "product structure"),
    "one-sort": (cmd_one_sort, "one-sorted reduction and its round trip"),
    "hf-encode": (cmd_hf_encode, "hereditarily finite set encoding"),
    "chain-gap": (cmd_chain_gap, "least N with C(N*m, r1) < C(N, r2)"),
    "canon": (cmd_canon, "canonical code"),
    "iso": (cmd_iso, "isomorphism test"),
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fraisse", description="Finite structures, classes and interpretations.")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    for name, (fn, help_) in COMMANDS.items():
        c = sub.add_parser(name, help=help_, description=help_)
        c.set_defaults(func=fn)
        c.add_argument("--class", dest="cls", metavar="CLASS", help="catalog expression or class file")
        c.add_argument("--in", dest="inputs", action="append", metavar="FILE", help="input structure file")
        c.add_argument("--out", metavar="PATH")
        c.add_argument("--size", type=int)
        c.add_argument("--bound", type=int)
        c.add_argument("--m", type=int)
        c.add_argument("--max-nodes", type=int)
        c.add_argument("--colors", type=int)
        c.add_argument("--budget", type=int)
        if name == "check-axiom":
            c.add_argument("--axiom", choices=AXIOMS)
        if name in ("generic", "verify-extension", "remove-cliques"):
            c.add_argument("--k", type=int)
        if name == "verify-witness":
            c.add_argument("--interp", metavar="FILE")
            c.add_argument("--encoding", metavar="FILE")
        if name == "search-interp":
            c.add_argument("--from", dest="source", metavar="CLASS")
            c.add_argument("--to", dest="target", metavar="CLASS")
        if name == "lift-arity":
            c.add_argument("--r2", type=int)
        if name in ("lift-arity", "remove-cliques", "encode-society", "code-order"):
            c.add_argument("--interp-out", metavar="FILE")
        if name == "chain-gap":
            c.add_argument("--r1", type=int)
            c.add_argument("--r2", type=int)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return _result("USAGE", USAGE)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}")
        return _result("BUDGET", BUDGET)
    except (io.ParseError, CatalogError, ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return _result("ERROR", USAGE)


if __name__ == "__main__":
    sys.exit(main())
