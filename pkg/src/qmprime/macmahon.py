"""MacMahon's partition functions and the flagship prime identity.

``M_a(n) = sum over 0 < s_1 < ... < s_a and m_i >= 1 with n = sum m_i s_i
of m_1 ... m_a``, generated by ``sum_{s_1 < ... < s_a} prod q^{s_i} / (1 - q^{s_i})^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qmprime import _kernels
from qmprime.ntheory import prime_mask

_INT64_SAFE = 2**60


@dataclass(frozen=True)
class MacMahonTable:
    a: int
    values: tuple[int, ...]

    @property
    def nmax(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n: int) -> int:
        return self.values[n]

    def to_csv(self) -> str:
        rows = [f"n,M_{self.a}(n)"]
        rows += [f"{n},{v}" for n, v in enumerate(self.values)]
        return "\n".join(rows) + "\n"


def macmahon_table(a: int, nmax: int) -> MacMahonTable:
    """``M_a(0..nmax)`` by dynamic programming over parts ``s = 1, 2, ...``.

    Runs in int64 (numba or numpy) when a float64 pass shows every value stays
    (and every intermediate layer) stays below ``2**60``; otherwise in arbitrary precision.
    """
    if a < 1:
        raise ValueError("a must be at least 1")
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    if _kernels.macmahon_float_peak(a, nmax) < _INT64_SAFE:
        vals = _kernels.macmahon_int64(a, nmax)
    else:
        vals = _kernels.macmahon_object(a, nmax)
    return MacMahonTable(a, tuple(int(v) for v in vals))


@dataclass
class IdentityReport:
    """Scan of ``(n^2 - 3n + 2) M_1(n) = 8 M_2(n)`` against primality for ``2 <= n <= nmax``."""

    nmax: int
    failures: list = field(default_factory=list)  # (n, lhs, rhs, is_prime)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "identity": "(n^2-3n+2) M_1(n) = 8 M_2(n)",
            "range": [2, self.nmax],
            "checked": self.checked,
            "ok": self.ok,
            "failures": [
                {"n": n, "lhs": str(lhs), "rhs": str(rhs), "prime": is_p} for n, lhs, rhs, is_p in self.failures
            ],
        }


def verify_prime_identity(nmax: int) -> IdentityReport:
    """Record every ``n`` where "identity holds" and "n is prime" disagree.

    ``n = 1`` is skipped: both sides vanish there although 1 is not prime.
    """
    if nmax < 2:
        raise ValueError("nmax must be at least 2")
    m1 = macmahon_table(1, nmax)
    m2 = macmahon_table(2, nmax)
    primes = prime_mask(nmax)
    report = IdentityReport(nmax)
    for n in range(2, nmax + 1):
        lhs = (n * n - 3 * n + 2) * m1[n]
        rhs = 8 * m2[n]
        if (lhs == rhs) != bool(primes[n]):
            report.failures.append((n, lhs, rhs, bool(primes[n])))
        report.checked += 1
    return report


def macmahon_brute_force(a: int, n: int) -> int:
    """Direct enumeration of the defining sum (exponential; for testing)."""

    def rec(remaining: int, parts_left: int, min_part: int) -> int:
        if parts_left == 0:
            return 1 if remaining == 0 else 0
        total = 0
        s = min_part
        # the remaining parts_left parts are >= s, s+1, ...: need sum >= s*parts_left + ...
        while s * parts_left + parts_left * (parts_left - 1) // 2 <= remaining:
            m = 1
            while m * s <= remaining:
                total += m * rec(remaining - m * s, parts_left - 1, s + 1)
                m += 1
            s += 1
        return total

    return rec(n, a, 1)


def as_array(table: MacMahonTable) -> np.ndarray:
    return np.array(table.values, dtype=object)
