"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The numba timings exclude the first (compiling) call, which is reported
separately.  Both paths are checked to return the same answer.
"""

import argparse
import itertools
import time

import numpy as np

from fraisse import _accel, kernels
from fraisse.catalog import hypergraphs
from fraisse.generic import build_generic
from fraisse.logic import CompiledFormula, parse_formula


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def eval_case():
    S = build_generic(hypergraphs(2), 2)
    phi = parse_formula("(R(x0.0, x1.1) & !(x0.1 = x1.0)) | (R(x1.0, x0.0) & R(x0.1, x1.1))", 2, 2)
    n = min(S.size, 14)
    flat = np.array(list(itertools.product(range(n), repeat=4)), dtype=np.int64)
    cf = CompiledFormula(phi, S.signature)
    label = f"eval_program    |S|={S.size} rows={len(flat)}"
    return label, lambda flag: cf.run(S, flat, use_numba=flag)


def colouring_case(n=7, k=2):
    # copies of a 2-chain inside an n-chain; answer is "no bad colouring"
    copies = np.array(list(itertools.combinations(range(n), 2)), dtype=np.int64)
    label = f"first_bad_colouring n={n} k={k} copies={len(copies)}"
    return label, lambda flag: kernels.first_bad_colouring(copies, n, k, use_numba=flag)


def colouring_case_large():
    # 5-sets of a 12-set, 3 colours.  A bad colouring (4+4+4) appears early in
    # lexicographic order: the loop stops there, numpy still scores a whole chunk.
    n, k = 12, 3
    copies = np.array(list(itertools.combinations(range(n), 5)), dtype=np.int64)
    label = f"first_bad_colouring n={n} k={k} copies={len(copies)}"
    return label, lambda flag: kernels.first_bad_colouring(copies, n, k, use_numba=flag)


def colouring_case_exhaustive(n=9, k=2):
    # 3-sets of a 9-set, 2 colours: no bad colouring, so both paths scan all 2^8
    copies = np.array(list(itertools.combinations(range(n), 3)), dtype=np.int64)
    label = f"first_bad_colouring n={n} k={k} copies={len(copies)} (full scan)"
    return label, lambda flag: kernels.first_bad_colouring(copies, n, k, use_numba=flag)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"numba available: {_accel.HAVE_NUMBA}")
    for label, run in (eval_case(), colouring_case(), colouring_case_exhaustive(), colouring_case_large()):
        t_np, out_np = best_of(lambda: run(False), args.repeat)
        line = f"{label:52s} numpy {t_np * 1e3:9.2f} ms"
        if _accel.HAVE_NUMBA:
            t = time.perf_counter()
            run(True)
            first = time.perf_counter() - t
            t_nb, out_nb = best_of(lambda: run(True), args.repeat)
            same = (out_np is None and out_nb is None) or (
                out_np is not None and out_nb is not None and np.array_equal(out_np, out_nb)
            )
            line += f"  numba {t_nb * 1e3:9.2f} ms  (first call {first:.2f} s)  speedup {t_np / t_nb:6.1f}x  same={same}"
        print(line)


if __name__ == "__main__":
    main()
