"""Time each hot kernel through its numba and numpy implementations.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Both paths are called directly, so the result does not depend on
QMPRIME_DISABLE_NUMBA.  The first numba call (compilation) is excluded.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qmprime import _kernels
from qmprime.qseries import _crt_primes, _jacobi_cube_terms


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    n = 2_000_000
    yield "prime_sieve", f"n={n}", (n,)

    length = 20_001
    offsets, weights = _jacobi_cube_terms(length)
    p = _crt_primes(1)[0]
    dense = np.random.default_rng(0).integers(0, p, size=length, dtype=np.int64)
    yield "sparse_mulmod", f"length={length}, {offsets.size} terms", (dense, offsets, weights.astype(np.int64) % p, p)

    yield "macmahon", "a=3, nmax=3000", (3, 3000)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy path can run")
    print(f"{'kernel':<15}{'case':<32}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for name, label, call_args in cases():
        np_fn = _kernels.NUMPY_IMPL[name]
        nb_fn = _kernels.NUMBA_IMPL[name]
        t_np = _best(lambda: np_fn(*call_args), args.repeat)
        if nb_fn is None:
            print(f"{name:<15}{label:<32}{t_np:>10.4f}{'-':>10}{'-':>9}")
            continue
        ref = np_fn(*call_args)
        got = nb_fn(*call_args)  # compiles on first use
        assert np.array_equal(ref, got), f"{name}: numba and numpy disagree"
        t_nb = _best(lambda: nb_fn(*call_args), args.repeat)
        print(f"{name:<15}{label:<32}{t_np:>10.4f}{t_nb:>10.4f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
