"""Text formats: structures, signatures, interpretations, encodings, class specs.

Structure file::

    # comment
    sorts: V=3
    rels: R/2:V,V
    R: (0,1) (1,0)

Signature text (used inside interpretation headers and class files)::

    R/2,Q/3                       one sort named V
    sorts=A,B;R/2:A.B,U/1:A       general form
    none                          one sort V, no relations

Interpretation file::

    interp m=2 from=<0/2 to=R/2
    theta <0: R(x0.0, x1.1)

Encoding file: a structure file for the target followed by::

    map:
    0 -> (0,3)

Class file::

    class <name> sig <sigtext> [forbid <file>]... [builtin <name> <p,p>]... [nonhereditary]

Paths after ``forbid`` are resolved relative to the class file.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Sequence

from .classes import Builtin, ClassSpec, Forbidden
from .constructions import Interpretation
from .logic import FormulaError, parse_formula
from .structures import RelationSymbol, Signature, Structure


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, source: str | None = None):
        where = f"{source or '<text>'}:{line}: " if line is not None else ""
        super().__init__(where + msg)
        self.line = line


_NAME = r"[^\s:/=(),;.]+"


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


# ------------------------------------------------------------------ signatures
def format_signature(sig: Signature) -> str:
    if sig.sorts == ("V",):
        return ",".join(f"{r.name}/{r.arity}" for r in sig.relations) or "none"
    rels = ",".join(f"{r.name}/{r.arity}:{'.'.join(r.profile)}" for r in sig.relations)
    return f"sorts={','.join(sig.sorts)};{rels}"


def parse_signature(text: str) -> Signature:
    text = text.strip()
    if text == "none":
        return Signature(("V",), ())
    if text.startswith("sorts="):
        head, _, body = text[len("sorts="):].partition(";")
        sorts = tuple(s for s in head.split(",") if s)
        rels = []
        for item in filter(None, body.split(",")):
            m = re.fullmatch(rf"({_NAME})/(\d+):({_NAME}(?:\.{_NAME})*)", item)
            if not m:
                raise ValueError(f"bad relation {item!r} in signature")
            rels.append(RelationSymbol(m.group(1), int(m.group(2)), tuple(m.group(3).split("."))))
        return Signature(sorts, tuple(rels))
    rels = []
    for item in filter(None, text.split(",")):
        m = re.fullmatch(rf"({_NAME})/(\d+)", item.strip())
        if not m:
            raise ValueError(f"bad relation {item!r} in signature")
        rels.append((m.group(1), int(m.group(2))))
    return Signature.one_sorted(rels)


# ------------------------------------------------------------------ structures
def format_structure(S: Structure) -> str:
    sig = S.signature
    out = [
        "sorts: " + " ".join(f"{s}={n}" for s, n in zip(sig.sorts, S.sizes)),
        "rels:" + "".join(f" {r.name}/{r.arity}:{','.join(r.profile)}" for r in sig.relations),
    ]
    for r, tuples in zip(sig.relations, S.relations):
        body = " ".join("(" + ",".join(map(str, t)) + ")" for t in sorted(tuples))
        out.append(f"{r.name}: {body}".rstrip())
    return "\n".join(out) + "\n"


_TUPLE = re.compile(r"\(\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)")


def _parse_structure_lines(lines: list[tuple[int, str]], source: str | None) -> Structure:
    if len(lines) < 2:
        raise ParseError("expected 'sorts:' and 'rels:' header lines", lines[-1][0] if lines else 1, source)
    no, line = lines[0]
    if not line.startswith("sorts:"):
        raise ParseError("first line must start with 'sorts:'", no, source)
    sorts, sizes = [], []
    for item in line[len("sorts:"):].split():
        m = re.fullmatch(rf"({_NAME})=(\d+)", item)
        if not m:
            raise ParseError(f"bad sort declaration {item!r}", no, source)
        sorts.append(m.group(1))
        sizes.append(int(m.group(2)))
    no, line = lines[1]
    if not line.startswith("rels:"):
        raise ParseError("second line must start with 'rels:'", no, source)
    rels = []
    for item in line[len("rels:"):].split():
        m = re.fullmatch(rf"({_NAME})/(\d+):({_NAME}(?:,{_NAME})*)", item)
        if not m:
            raise ParseError(f"bad relation declaration {item!r}", no, source)
        rels.append(RelationSymbol(m.group(1), int(m.group(2)), tuple(m.group(3).split(","))))
    try:
        sig = Signature(tuple(sorts), tuple(rels))
    except ValueError as e:
        raise ParseError(str(e), no, source) from None
    data: dict[str, set] = {r.name: set() for r in rels}
    seen: set[str] = set()
    for no, line in lines[2:]:
        name, sep, body = line.partition(":")
        name = name.strip()
        if not sep or name not in data:
            raise ParseError(f"expected '<relation>: (..) ..', got {line!r}", no, source)
        if name in seen:
            raise ParseError(f"relation {name} listed twice", no, source)
        seen.add(name)
        rest = _TUPLE.sub("", body).strip()
        if rest:
            raise ParseError(f"unexpected text {rest!r}", no, source)
        arity = sig.relation(name).arity
        for m in _TUPLE.finditer(body):
            t = tuple(int(x) for x in m.group(1).split(","))
            if len(t) != arity:
                raise ParseError(f"{name}: tuple {t} should have length {arity}", no, source)
            data[name].add(t)
    try:
        return Structure.build(sig, sizes, data)
    except ValueError as e:
        raise ParseError(str(e), lines[-1][0], source) from None


def parse_structure(text: str, source: str | None = None) -> Structure:
    return _parse_structure_lines(list(_lines(text)), source)


def read_structure(path: str | Path) -> Structure:
    return parse_structure(Path(path).read_text(encoding="utf-8"), str(path))


def write_structure(S: Structure, path: str | Path) -> None:
    Path(path).write_text(format_structure(S), encoding="utf-8")


# ------------------------------------------------------------- interpretations
def format_interpretation(I: Interpretation) -> str:
    out = [f"interp m={I.m} from={format_signature(I.source)} to={format_signature(I.target)}"]
    out += [f"theta {name}: {th}" for name, th in I.thetas]
    return "\n".join(out) + "\n"


def parse_interpretation(text: str, source: str | None = None) -> Interpretation:
    lines = list(_lines(text))
    if not lines:
        raise ParseError("empty interpretation file", 1, source)
    no, head = lines[0]
    m = re.fullmatch(r"interp\s+m=(\d+)\s+from=(\S+)\s+to=(\S+)", head)
    if not m:
        raise ParseError("header must read 'interp m=<m> from=<sig> to=<sig>'", no, source)
    width = int(m.group(1))
    try:
        src, tgt = parse_signature(m.group(2)), parse_signature(m.group(3))
    except ValueError as e:
        raise ParseError(str(e), no, source) from None
    thetas: dict[str, object] = {}
    for no, line in lines[1:]:
        mm = re.fullmatch(rf"theta\s+({_NAME})\s*:\s*(.+)", line)
        if not mm:
            raise ParseError(f"expected 'theta <R>: <formula>', got {line!r}", no, source)
        name = mm.group(1)
        if name not in src.names():
            raise ParseError(f"{name} is not a source relation", no, source)
        if name in thetas:
            raise ParseError(f"theta for {name} given twice", no, source)
        try:
            thetas[name] = parse_formula(mm.group(2), src.relation(name).arity, width)
        except (FormulaError, ValueError) as e:
            raise ParseError(str(e), no, source) from None
    missing = [r for r in src.names() if r not in thetas]
    if missing:
        raise ParseError(f"missing theta for {', '.join(missing)}", lines[-1][0], source)
    try:
        return Interpretation.make(src, tgt, width, thetas)
    except ValueError as e:
        raise ParseError(str(e), lines[-1][0], source) from None


def read_interpretation(path: str | Path) -> Interpretation:
    return parse_interpretation(Path(path).read_text(encoding="utf-8"), str(path))


# ------------------------------------------------------------------ encodings
def format_encoding(C: Structure, u: Sequence[Sequence[int]]) -> str:
    lines = [format_structure(C).rstrip("\n"), "map:"]
    lines += [f"{b} -> ({','.join(map(str, t))})" for b, t in enumerate(u)]
    return "\n".join(lines) + "\n"


def parse_encoding(text: str, source: str | None = None) -> tuple[Structure, tuple[tuple[int, ...], ...]]:
    lines = list(_lines(text))
    cut = next((i for i, (_, l) in enumerate(lines) if l == "map:"), None)
    if cut is None:
        raise ParseError("missing 'map:' section", lines[-1][0] if lines else 1, source)
    C = _parse_structure_lines(lines[:cut], source)
    u: dict[int, tuple[int, ...]] = {}
    for no, line in lines[cut + 1:]:
        m = re.fullmatch(r"(\d+)\s*->\s*" + _TUPLE.pattern, line)
        if not m:
            raise ParseError(f"expected 'b -> (c0,..)', got {line!r}", no, source)
        b = int(m.group(1))
        if b in u:
            raise ParseError(f"element {b} mapped twice", no, source)
        u[b] = tuple(int(x) for x in m.group(2).split(","))
    if sorted(u) != list(range(len(u))):
        raise ParseError("map must cover elements 0..n-1", lines[-1][0], source)
    return C, tuple(u[b] for b in range(len(u)))


def read_encoding(path: str | Path):
    return parse_encoding(Path(path).read_text(encoding="utf-8"), str(path))


def write_encoding(C: Structure, u, path: str | Path) -> None:
    Path(path).write_text(format_encoding(C, u), encoding="utf-8")


# ------------------------------------------------------------------ class files
def parse_class_spec(text: str, base: str | Path = ".", source: str | None = None) -> ClassSpec:
    tokens: list[tuple[int, str]] = [(no, tok) for no, line in _lines(text) for tok in line.split()]
    if len(tokens) < 4 or tokens[0][1] != "class" or tokens[2][1] != "sig":
        raise ParseError("expected 'class <name> sig <signature> ...'", tokens[0][0] if tokens else 1, source)
    name = tokens[1][1]
    try:
        sig = parse_signature(tokens[3][1])
    except ValueError as e:
        raise ParseError(str(e), tokens[3][0], source) from None
    cons: list = []
    hereditary = True
    i = 4
    while i < len(tokens):
        no, kw = tokens[i]
        if kw == "nonhereditary":
            hereditary = False
            i += 1
        elif kw == "forbid" and i + 1 < len(tokens):
            path = Path(base) / tokens[i + 1][1]
            try:
                cons.append(Forbidden((read_structure(path),)))
            except OSError as e:
                raise ParseError(f"cannot read {path}: {e.strerror}", no, source) from None
            i += 2
        elif kw == "builtin" and i + 1 < len(tokens):
            bname = tokens[i + 1][1]
            params: tuple = ()
            if i + 2 < len(tokens) and tokens[i + 2][1] not in ("forbid", "builtin", "nonhereditary"):
                params = tuple(int(p) if p.isdigit() else p for p in tokens[i + 2][1].split(","))
                i += 1
            cons.append(Builtin(bname, params))
            i += 2
        else:
            raise ParseError(f"unexpected token {kw!r}", no, source)
    try:
        return ClassSpec(sig, tuple(cons), name, hereditary)
    except ValueError as e:
        raise ParseError(str(e), tokens[-1][0], source) from None


def read_class_spec(path: str | Path) -> ClassSpec:
    p = Path(path)
    return parse_class_spec(p.read_text(encoding="utf-8"), p.parent, str(p))


def format_class_spec(K: ClassSpec, forbid_files: Sequence[str] = ()) -> str:
    parts = [f"class {K.name} sig {format_signature(K.signature)}"]
    parts += [f"forbid {f}" for f in forbid_files]
    for b in K.builtins:
        parts.append(f"builtin {b.name} {','.join(map(str, b.params))}".rstrip())
    if not K.hereditary:
        parts.append("nonhereditary")
    return "\n".join(parts) + "\n"
