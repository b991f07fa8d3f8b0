"""The numba kernels and their numpy fallbacks must agree."""

import itertools
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraisse import _accel, kernels
from fraisse.logic import CompiledFormula, parse_formula
from helpers import chain, graph

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba unavailable or disabled")


def _brute_bad(copies, n, k):
    for col in itertools.product(range(k), repeat=n):
        if col[0] != 0:
            continue
        if not any(len({col[i] for i in c}) == 1 for c in copies):
            return col
    return None


@settings(max_examples=80, deadline=None)
@given(
    st.integers(1, 7),
    st.integers(1, 3),
    st.lists(st.lists(st.integers(0, 6), min_size=1, max_size=3), min_size=1, max_size=6),
)
def test_colouring_kernels_agree(n, k, raw):
    copies = [sorted({x % n for x in c}) for c in raw]
    width = max(map(len, copies))
    arr = np.array([c + [c[-1]] * (width - len(c)) for c in copies], dtype=np.int64)
    want = _brute_bad(copies, n, k)
    for flag in (False, True) if _accel.HAVE_NUMBA else (False,):
        got = kernels.first_bad_colouring(arr, n, k, use_numba=flag)
        assert (got is None) == (want is None)
        if got is not None:
            assert len(got) == n and got.max() < k
            assert not any(len({int(got[i]) for i in c}) == 1 for c in copies)


@needs_numba
def test_eval_kernels_agree():
    S = graph(5, [(0, 1), (1, 2), (3, 4), (0, 4)])
    phi = parse_formula("(R(x0.0, x1.1) & !(x0.1 = x1.0)) | R(x1.0, x0.0)", 2, 2)
    flat = np.array(list(itertools.product(range(5), repeat=4)), dtype=np.int64)
    cf = CompiledFormula(phi, S.signature)
    assert np.array_equal(cf.run(S, flat, use_numba=True), cf.run(S, flat, use_numba=False))


def test_env_flag_disables_numba():
    code = "from fraisse import _accel, kernels; print(_accel.HAVE_NUMBA, kernels.USE_NUMBA)"
    env = dict(os.environ, FRAISSE_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "False"]


def test_ramsey_answer_independent_of_backend():
    from fraisse.generic import is_ramsey_witness

    A, B = chain(1), chain(2)
    for n, k, want in [(3, 2, True), (2, 2, False), (4, 3, True), (3, 3, False)]:
        C = chain(n)
        assert is_ramsey_witness(A, B, C, k, use_numba=False) == want
        if _accel.HAVE_NUMBA:
            assert is_ramsey_witness(A, B, C, k, use_numba=True) == want
