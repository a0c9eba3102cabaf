"""Hot integer loops, each with a numba ``@njit`` body and a pure-numpy twin.

The numba path is used when numba imports and ``QMPRIME_DISABLE_NUMBA`` is not
set to a truthy value.  Both paths return identical arrays; the test suite runs
each kernel through both and ``benchmarks/bench_kernels.py`` times them.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    numba = None
    HAVE_NUMBA = False

_DISABLED = os.environ.get("QMPRIME_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = HAVE_NUMBA and not _DISABLED


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# --- prime sieve -------------------------------------------------------------


def _prime_sieve_numpy(n: int) -> np.ndarray:
    mask = np.ones(n + 1, dtype=np.bool_)
    mask[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return mask


def _prime_sieve_loop(n):
    mask = np.ones(n + 1, dtype=np.bool_)
    mask[0] = False
    if n >= 1:
        mask[1] = False
    p = 2
    while p * p <= n:
        if mask[p]:
            for q in range(p * p, n + 1, p):
                mask[q] = False
        p += 1
    return mask


# --- sparse x dense product mod p ---------------------------------------------


def _sparse_mulmod_numpy(dense: np.ndarray, offsets: np.ndarray, weights: np.ndarray, p: int) -> np.ndarray:
    n = dense.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for off, w in zip(offsets.tolist(), weights.tolist()):
        if off >= n:
            continue
        out[off:] = (out[off:] + w * dense[: n - off]) % p
    return out


def _sparse_mulmod_loop(dense, offsets, weights, p):
    n = dense.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for i in range(offsets.shape[0]):
        off = offsets[i]
        w = weights[i]
        for j in range(off, n):
            out[j] = (out[j] + w * dense[j - off]) % p
    return out


# --- MacMahon generating-function DP -----------------------------------------


def _strided_cumsum(x: np.ndarray, s: int) -> np.ndarray:
    """Prefix sums within each residue class of the index mod ``s``."""
    n = x.shape[0]
    rows = -(-n // s)
    pad = np.zeros(rows * s, dtype=x.dtype)
    pad[:n] = x
    return np.cumsum(pad.reshape(rows, s), axis=0).reshape(-1)[:n]


def _macmahon_layers(a: int, nmax: int, dtype) -> np.ndarray:
    layers = np.zeros((a + 1, nmax + 1), dtype=dtype)
    layers[0, 0] = 1
    for s in range(1, nmax + 1):
        width = nmax - s + 1
        for j in range(a, 0, -1):
            src = layers[j - 1, :width]
            if not src.any():
                continue
            b = _strided_cumsum(_strided_cumsum(src, s), s)
            layers[j, s:] = layers[j, s:] + b
    return layers


def _macmahon_numpy(a: int, nmax: int, dtype=np.int64) -> np.ndarray:
    return _macmahon_layers(a, nmax, dtype)[a].copy()


def _macmahon_loop(a, nmax):
    layers = np.zeros((a + 1, nmax + 1), dtype=np.int64)
    layers[0, 0] = 1
    buf = np.zeros(nmax + 1, dtype=np.int64)
    for s in range(1, nmax + 1):
        width = nmax - s + 1
        for j in range(a, 0, -1):
            for i in range(width):
                buf[i] = layers[j - 1, i]
            for _ in range(2):
                for i in range(s, width):
                    buf[i] += buf[i - s]
            for i in range(width):
                layers[j, i + s] += buf[i]
    return layers[a].copy()


if USE_NUMBA:
    _prime_sieve_numba = numba.njit(cache=True)(_prime_sieve_loop)
    _sparse_mulmod_numba = numba.njit(cache=True)(_sparse_mulmod_loop)
    _macmahon_numba = numba.njit(cache=True)(_macmahon_loop)
else:  # pragma: no cover - exercised only without numba
    _prime_sieve_numba = _sparse_mulmod_numba = _macmahon_numba = None


NUMPY_IMPL = {
    "prime_sieve": _prime_sieve_numpy,
    "sparse_mulmod": _sparse_mulmod_numpy,
    "macmahon": _macmahon_numpy,
}
NUMBA_IMPL = {
    "prime_sieve": _prime_sieve_numba,
    "sparse_mulmod": _sparse_mulmod_numba,
    "macmahon": _macmahon_numba,
}


def prime_sieve(n: int) -> np.ndarray:
    if USE_NUMBA:
        return _prime_sieve_numba(n)
    return _prime_sieve_numpy(n)


def sparse_mulmod(dense: np.ndarray, offsets: np.ndarray, weights: np.ndarray, p: int) -> np.ndarray:
    """``out[n] = sum_i weights[i] * dense[n - offsets[i]] mod p`` (entries below 2**31)."""
    dense = np.ascontiguousarray(dense, dtype=np.int64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.int64)
    if USE_NUMBA:
        return _sparse_mulmod_numba(dense, offsets, weights, np.int64(p))
    return _sparse_mulmod_numpy(dense, offsets, weights, p)


def macmahon_int64(a: int, nmax: int) -> np.ndarray:
    if USE_NUMBA:
        return _macmahon_numba(a, nmax)
    return _macmahon_numpy(a, nmax)


def macmahon_object(a: int, nmax: int) -> np.ndarray:
    """Arbitrary-precision variant (numpy object arrays); no numba twin."""
    return _macmahon_numpy(a, nmax, dtype=object)


def macmahon_float_peak(a: int, nmax: int) -> float:
    """Largest value any DP layer reaches, in float64; used to rule out int64 overflow."""
    return float(_macmahon_layers(a, nmax, np.float64).max(initial=0.0))
