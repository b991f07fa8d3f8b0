"""Small structure constructors shared by the tests."""

from fraisse.structures import Signature, Structure

GRAPH = Signature.one_sorted([("R", 2)])


def graph(n, edges):
    return Structure.build(GRAPH, n, {"R": [p for a, b in edges for p in ((a, b), (b, a))]})


def hyper(r, n, edges, name="R"):
    import itertools

    sig = Signature.one_sorted([(name, r)])
    return Structure.build(sig, n, {name: [p for e in edges for p in itertools.permutations(e)]})


def chain(n, name="<0"):
    sig = Signature.one_sorted([(name, 2)])
    return Structure.build(sig, n, {name: [(i, j) for i in range(n) for j in range(i + 1, n)]})


def cycle(n):
    return graph(n, [(i, (i + 1) % n) for i in range(n)])
