"""Elementary integer helpers: primality, factorization, divisors, CRT."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from qmprime import _kernels

# Deterministic Miller-Rabin: these bases are exact for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3317044064679887385961981


def is_prime(n: int) -> bool:
    """Deterministic primality test for integers below 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:
        raise ValueError(f"is_prime is only deterministic below {_MR_LIMIT}")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_mask(n: int) -> np.ndarray:
    """Boolean array ``mask`` of length ``n + 1`` with ``mask[k]`` true iff k is prime."""
    return _kernels.prime_sieve(max(int(n), 1))


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    return [int(p) for p in np.flatnonzero(prime_mask(n))]


def primes_in_progression(m: int, M: int, count: int, start: int = 2) -> list[int]:
    """The first ``count`` primes ``p >= start`` with ``p ≡ m (mod M)``."""
    if math.gcd(m, M) != 1:
        raise ValueError(f"progression {m} mod {M} holds at most one prime")
    out: list[int] = []
    p = start + (m - start) % M
    while len(out) < count:
        if is_prime(p):
            out.append(p)
        p += M
    return out


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Trial-division factorization as sorted ``((p, e), ...)``."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def euler_phi(n: int) -> int:
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def lcm(*args: int) -> int:
    out = 1
    for a in args:
        out = out * a // math.gcd(out, a)
    return out


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int] | None:
    """Solve ``x ≡ r1 (m1), x ≡ r2 (m2)``; returns ``(x mod L, L)`` or None."""
    g = math.gcd(m1, m2)
    if (r1 - r2) % g:
        return None
    L = m1 // g * m2
    # x = r1 + m1 * t with m1 * t ≡ r2 - r1 (mod m2)
    t = ((r2 - r1) // g * pow(m1 // g, -1, m2 // g)) % (m2 // g) if m2 // g > 1 else 0
    return (r1 + m1 * t) % L, L


def is_primitive_root(g: int, n: int) -> bool:
    phi = euler_phi(n)
    if math.gcd(g, n) != 1:
        return False
    return all(pow(g, phi // q, n) != 1 for q, _ in factorize(phi))


@lru_cache(maxsize=1024)
def smallest_primitive_root(n: int) -> int:
    """Smallest positive primitive root of ``n`` (n an odd prime power, or 2, 4)."""
    if n in (1, 2):
        return 1
    for g in range(2, n):
        if is_primitive_root(g, n):
            return g
    raise ValueError(f"{n} has no primitive root")
