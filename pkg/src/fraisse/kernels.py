"""Hot loops: batched formula evaluation and exhaustive colouring checks.

Every kernel has a loop version (compiled with numba when available) and a
vectorised numpy version.  ``USE_NUMBA`` selects the default; both are
importable under explicit names so they can be compared.
"""

from __future__ import annotations

import numpy as np

from ._accel import HAVE_NUMBA, njit

USE_NUMBA = HAVE_NUMBA

OP_ATOM, OP_EQ, OP_NOT, OP_AND, OP_OR = 0, 1, 2, 3, 4


# ----------------------------------------------------- formula evaluation
#
# A program is an int64 array of postfix instructions, one row each:
#   ATOM: [0, rel, v0, v1, ...]     EQ: [1, va, vb]
#   NOT:  [2]                       AND/OR: [3|4, n_operands]
# Relations are flattened dense uint8 arrays packed into ``data``;
# ``offsets[j]`` is where relation j starts, ``strides[j, p]`` its stride
# for argument p, ``shifts``/``dims`` map global ids to local indices.

def _eval_program_loop(prog, arity, data, offsets, strides, shifts, dims, assign):
    n_rows = assign.shape[0]
    n_ins = prog.shape[0]
    out = np.zeros(n_rows, dtype=np.uint8)
    stack = np.zeros(n_ins + 1, dtype=np.uint8)
    for row in range(n_rows):
        sp = 0
        for pc in range(n_ins):
            op = prog[pc, 0]
            if op == 0:
                j = prog[pc, 1]
                flat = offsets[j]
                ok = True
                for p in range(arity[j]):
                    x = assign[row, prog[pc, 2 + p]] - shifts[j, p]
                    if x < 0 or x >= dims[j, p]:
                        ok = False
                        break
                    flat += x * strides[j, p]
                stack[sp] = data[flat] if ok else 0
                sp += 1
            elif op == 1:
                stack[sp] = 1 if assign[row, prog[pc, 1]] == assign[row, prog[pc, 2]] else 0
                sp += 1
            elif op == 2:
                stack[sp - 1] = 1 - stack[sp - 1]
            else:
                cnt = prog[pc, 1]
                acc = stack[sp - cnt]
                for q in range(sp - cnt + 1, sp):
                    if op == 3:
                        acc = acc & stack[q]
                    else:
                        acc = acc | stack[q]
                sp -= cnt
                stack[sp] = acc
                sp += 1
        out[row] = stack[0]
    return out


def _eval_program_numpy(prog, arity, data, offsets, strides, shifts, dims, assign):
    n_rows = assign.shape[0]
    stack: list[np.ndarray] = []
    for ins in prog:
        op = ins[0]
        if op == OP_ATOM:
            j = ins[1]
            flat = np.full(n_rows, offsets[j], dtype=np.int64)
            ok = np.ones(n_rows, dtype=bool)
            for p in range(arity[j]):
                x = assign[:, ins[2 + p]] - shifts[j, p]
                ok &= (x >= 0) & (x < dims[j, p])
                flat += np.where(ok, x, 0) * strides[j, p]
            stack.append(ok & (data[flat] != 0))
        elif op == OP_EQ:
            stack.append(assign[:, ins[1]] == assign[:, ins[2]])
        elif op == OP_NOT:
            stack[-1] = ~stack[-1]
        else:
            cnt = ins[1]
            args = stack[-cnt:]
            del stack[-cnt:]
            red = np.logical_and if op == OP_AND else np.logical_or
            stack.append(red.reduce(args, axis=0) if args else np.ones(n_rows, bool))
    return stack[0].astype(np.uint8) if stack else np.ones(n_rows, np.uint8)


_eval_program_numba = njit(_eval_program_loop)


def eval_program(prog, arity, data, offsets, strides, shifts, dims, assign, use_numba=None):
    """Evaluate a compiled formula on every row of ``assign``; returns uint8."""
    if use_numba is None:
        use_numba = USE_NUMBA
    args = (
        np.ascontiguousarray(prog, dtype=np.int64),
        np.ascontiguousarray(arity, dtype=np.int64),
        np.ascontiguousarray(data, dtype=np.uint8),
        np.ascontiguousarray(offsets, dtype=np.int64),
        np.ascontiguousarray(strides, dtype=np.int64),
        np.ascontiguousarray(shifts, dtype=np.int64),
        np.ascontiguousarray(dims, dtype=np.int64),
        np.ascontiguousarray(assign, dtype=np.int64),
    )
    if use_numba and _eval_program_numba is not None:
        return _eval_program_numba(*args)
    return _eval_program_numpy(*args)


# -------------------------------------------------- exhaustive colourings
#
# ``copies[c]`` lists the indices (into the embeddings of A) belonging to the
# c-th copy of B.  A colouring is *good* for us if some copy is constant.
# The colour of embedding 0 is fixed to 0 (colour symmetry).

def _first_bad_colouring_loop(copies, n_emb, k):
    n_copies, per = copies.shape
    col = np.zeros(n_emb, dtype=np.int64)
    while True:
        mono = False
        for c in range(n_copies):
            first = col[copies[c, 0]]
            same = True
            for q in range(1, per):
                if col[copies[c, q]] != first:
                    same = False
                    break
            if same:
                mono = True
                break
        if not mono:
            return col
        # odometer over positions 1..n_emb-1
        pos = n_emb - 1
        while pos >= 1:
            col[pos] += 1
            if col[pos] < k:
                break
            col[pos] = 0
            pos -= 1
        if pos < 1:
            return np.zeros(0, dtype=np.int64)


_first_bad_colouring_numba = njit(_first_bad_colouring_loop)


def _first_bad_colouring_numpy(copies, n_emb, k, chunk=1 << 15):
    free = n_emb - 1
    total = k ** free
    weights = k ** np.arange(free - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (idx[:, None] // weights[None, :]) % k
        cols = np.concatenate([np.zeros((len(idx), 1), np.int64), digits], axis=1)
        picked = cols[:, copies]  # (rows, copies, per)
        mono = (picked == picked[:, :, :1]).all(axis=2).any(axis=1)
        if not mono.all():
            return cols[int(np.argmin(mono))]
    return np.zeros(0, dtype=np.int64)


def first_bad_colouring(copies, n_emb: int, k: int, use_numba=None) -> np.ndarray | None:
    """A colouring of ``n_emb`` embeddings with no constant copy, or ``None``.

    Requires ``n_emb >= 1`` and every copy non-empty.
    """
    if use_numba is None:
        use_numba = USE_NUMBA
    copies = np.ascontiguousarray(copies, dtype=np.int64)
    if copies.shape[0] == 0:
        bad = np.zeros(n_emb, dtype=np.int64)
        return bad
    if use_numba and _first_bad_colouring_numba is not None:
        bad = _first_bad_colouring_numba(copies, int(n_emb), int(k))
    else:
        bad = _first_bad_colouring_numpy(copies, int(n_emb), int(k))
    return bad if len(bad) else None
