from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmprime import _kernels

needs_numba = pytest.mark.skipif(not _kernels.USE_NUMBA, reason="numba not installed or disabled")


@needs_numba
@given(st.integers(min_value=0, max_value=5000))
@settings(max_examples=40, deadline=None)
def test_prime_sieve_parity(n):
    a = _kernels.NUMPY_IMPL["prime_sieve"](n)
    b = _kernels.NUMBA_IMPL["prime_sieve"](n)
    assert np.array_equal(a, b)


@needs_numba
@given(
    st.lists(st.integers(min_value=0, max_value=10**6), min_size=1, max_size=60),
    st.lists(st.tuples(st.integers(min_value=0, max_value=80), st.integers(min_value=-50, max_value=50)), max_size=10),
)
@settings(max_examples=60, deadline=None)
def test_sparse_mulmod_parity(dense, terms):
    p = 1_000_003
    dense = np.array(dense, dtype=np.int64) % p
    offsets = np.array([o for o, _ in terms], dtype=np.int64)
    weights = np.array([w % p for _, w in terms], dtype=np.int64)
    a = _kernels.NUMPY_IMPL["sparse_mulmod"](dense, offsets, weights, p)
    b = _kernels.NUMBA_IMPL["sparse_mulmod"](dense, offsets, weights, np.int64(p))
    assert np.array_equal(a, b)
    # against a plain convolution
    ref = np.zeros(dense.size, dtype=object)
    for o, w in zip(offsets.tolist(), weights.tolist()):
        for j in range(o, dense.size):
            ref[j] += w * int(dense[j - o])
    assert [int(x) % p for x in ref] == a.tolist()


@needs_numba
@pytest.mark.parametrize("a", [1, 2, 3, 4])
def test_macmahon_parity(a):
    nmax = 300
    ref = _kernels.macmahon_object(a, nmax)
    assert np.array_equal(_kernels.NUMPY_IMPL["macmahon"](a, nmax), _kernels.NUMBA_IMPL["macmahon"](a, nmax))
    assert [int(x) for x in _kernels.NUMPY_IMPL["macmahon"](a, nmax)] == [int(x) for x in ref]


def test_float_peak_bounds_values():
    peak = _kernels.macmahon_float_peak(2, 100)
    assert peak >= max(int(x) for x in _kernels.macmahon_object(2, 100))


def test_env_flag_selects_numpy():
    code = "from qmprime import _kernels; print(_kernels.backend()); print(_kernels.prime_sieve(30).sum())"
    env = dict(os.environ, QMPRIME_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "10"]


def test_backend_reports_state():
    assert _kernels.backend() in ("numba", "numpy")
    assert (_kernels.backend() == "numba") == _kernels.USE_NUMBA
