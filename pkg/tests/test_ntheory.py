from __future__ import annotations

import math

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from qmprime import ntheory


def test_is_prime_matches_sympy_small():
    for n in range(-5, 5000):
        assert ntheory.is_prime(n) == bool(sympy.isprime(n)), n


@given(st.integers(min_value=1, max_value=10**18))
@settings(max_examples=300)
def test_is_prime_matches_sympy_large(n):
    assert ntheory.is_prime(n) == bool(sympy.isprime(n))


def test_prime_mask_and_list():
    mask = ntheory.prime_mask(1000)
    assert [n for n in range(1001) if mask[n]] == list(sympy.primerange(0, 1001))
    assert ntheory.primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert ntheory.primes_up_to(1) == []


def test_primes_in_progression():
    ps = ntheory.primes_in_progression(1, 4, 6)
    assert ps == [5, 13, 17, 29, 37, 41]
    assert ntheory.primes_in_progression(0, 1, 3) == [2, 3, 5]


@given(st.integers(min_value=1, max_value=10**6))
def test_factorize_and_divisors(n):
    fac = ntheory.factorize(n)
    assert math.prod(p**e for p, e in fac) == n
    assert dict(fac) == sympy.factorint(n)
    assert ntheory.divisors(n) == sympy.divisors(n)
    assert ntheory.euler_phi(n) == sympy.totient(n)


@given(
    st.integers(min_value=-50, max_value=50),
    st.integers(min_value=1, max_value=40),
    st.integers(min_value=-50, max_value=50),
    st.integers(min_value=1, max_value=40),
)
def test_crt_pair_matches_brute_force(r1, m1, r2, m2):
    L = math.lcm(m1, m2)
    sols = [x for x in range(L) if (x - r1) % m1 == 0 and (x - r2) % m2 == 0]
    got = ntheory.crt_pair(r1, m1, r2, m2)
    if not sols:
        assert got is None
    else:
        assert got == (sols[0], L)


def test_primitive_roots():
    for n in [3, 5, 7, 9, 11, 13, 25, 27, 49, 121, 4, 2]:
        g = ntheory.smallest_primitive_root(n)
        if n > 2:
            assert g == sympy.primitive_root(n)
            assert ntheory.is_primitive_root(g, n)
