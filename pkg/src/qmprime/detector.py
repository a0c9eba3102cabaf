"""Detection scans over arithmetic progressions and sign-change counting.

A coefficient source is a :class:`QSeries`, a sequence indexed from 0, or a
callable ``n -> value``.  Values may be ints, Fractions or CycValues.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from qmprime.algebra import CycValue, rational_to_str
from qmprime.eisenstein import NonRealCoefficientError
from qmprime.ntheory import crt_pair, prime_mask
from qmprime.qseries import QSeries

DETECTS = "detects"
STRONGLY_DETECTS = "strongly_detects"
FAILS = "fails"


@dataclass(frozen=True)
class Progression:
    """The residue class ``m mod M``, stored with ``0 <= m < M``."""

    m: int
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"modulus must be positive, got {self.M}")
        object.__setattr__(self, "m", self.m % self.M)

    @classmethod
    def parse(cls, text: str) -> Progression:
        """Read ``"m/M"`` (``"1/1"`` is every integer)."""
        parts = text.strip().split("/")
        if len(parts) != 2:
            raise ValueError(f"expected 'm/M', got {text!r}")
        try:
            m, M = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"expected integers in 'm/M', got {text!r}") from None
        return cls(m, M)

    @classmethod
    def everything(cls) -> Progression:
        return cls(0, 1)

    def contains(self, n: int) -> bool:
        return n % self.M == self.m

    def is_coprime(self) -> bool:
        return math.gcd(self.m, self.M) == 1

    def require_coprime(self) -> Progression:
        if not self.is_coprime():
            raise ValueError(f"progression {self} needs gcd(m, M) = 1")
        return self

    def members(self, bound: int, start: int = 1) -> range:
        first = start + (self.m - start) % self.M
        return range(first, bound + 1, self.M)

    def __str__(self) -> str:
        return f"{self.m}/{self.M}"


def progression_intersection(p1: Progression, p2: Progression) -> Progression | None:
    """``p1 ∩ p2`` as one progression modulo ``lcm(M1, M2)``, or None if empty."""
    solved = crt_pair(p1.m, p1.M, p2.m, p2.M)
    if solved is None:
        return None
    return Progression(*solved)


def v_set(m: int, M: int, N: int) -> list[int]:
    """Residues ``n mod N`` prime to ``N`` whose class meets ``m mod M``."""
    if math.gcd(m, M) != 1:
        raise ValueError(f"gcd({m}, {M}) must be 1")
    target = Progression(m, M)
    return [
        n
        for n in range(N)
        if math.gcd(n, N) == 1 and progression_intersection(Progression(n, N), target) is not None
    ]


# --- coefficient sources -------------------------------------------------------


def _as_cyc(value) -> CycValue:
    return value if isinstance(value, CycValue) else CycValue.rational(value)


def _nonzero_mask(source, bound: int) -> np.ndarray:
    """Boolean mask ``c(n) != 0`` for ``0 <= n <= bound``."""
    if isinstance(source, QSeries):
        if source.truncation < bound:
            raise ValueError(f"series truncated at {source.truncation}, scan needs {bound}")
        return (source.coords[: bound + 1] != 0).any(axis=1).astype(bool)
    if callable(source):
        return np.array([n > 0 and not _as_cyc(source(n)).is_zero() for n in range(bound + 1)], dtype=bool)
    if len(source) <= bound:
        raise ValueError(f"sequence has {len(source)} terms, scan needs {bound + 1}")
    return np.array([not _as_cyc(source[n]).is_zero() for n in range(bound + 1)], dtype=bool)


def _value(source, n: int) -> CycValue:
    if isinstance(source, QSeries):
        return source[n]
    if callable(source):
        return _as_cyc(source(n))
    return _as_cyc(source[n])


# --- detection -----------------------------------------------------------------


@dataclass
class DetectionReport:
    """Outcome of a detection scan.

    ``witnesses`` holds ``(n, value, expected)`` where ``expected`` is
    ``"zero"`` for primes that should vanish and ``"nonzero"`` for the other
    members that should not.  ``vacuous`` is set when every scanned
    coefficient is zero or the scan met no primes at all.
    """

    verdict: str
    progression: Progression
    level: int
    bound: int
    strong: bool
    witnesses: list = field(default_factory=list)
    vacuous: bool = False
    primes_checked: int = 0
    others_checked: int = 0

    @property
    def detects(self) -> bool:
        return self.verdict in (DETECTS, STRONGLY_DETECTS)

    @property
    def strongly_detects(self) -> bool:
        return self.verdict == STRONGLY_DETECTS

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "progression": str(self.progression),
            "level": str(self.level),
            "bound": str(self.bound),
            "strong": self.strong,
            "vacuous": self.vacuous,
            "primes_checked": str(self.primes_checked),
            "others_checked": str(self.others_checked),
            "witnesses": [{"n": str(n), "value": v.to_json(), "expected": e} for n, v, e in self.witnesses],
        }


def scan_detection(
    source,
    progression: Progression,
    level: int = 1,
    bound: int = 1000,
    strong: bool = False,
    max_witnesses: int = 25,
) -> DetectionReport:
    """Check that ``c(p) = 0`` for primes ``p <= bound`` in the progression with ``p ∤ level``.

    With ``strong`` also require ``c(n) != 0`` for every other ``1 <= n <= bound``
    in the progression prime to ``level``; ``n = 1`` is included.
    """
    if bound < 1:
        raise ValueError("bound must be positive")
    if level < 1:
        raise ValueError("level must be positive")
    nonzero = _nonzero_mask(source, bound)
    primes = prime_mask(bound)
    idx = np.array(progression.members(bound), dtype=np.int64)
    if level > 1 and idx.size:
        idx = idx[np.gcd(idx, level) == 1]
    is_p = primes[idx]
    prime_idx, other_idx = idx[is_p], idx[~is_p]

    bad_primes = prime_idx[nonzero[prime_idx]]
    report = DetectionReport(FAILS, progression, level, bound, strong)
    report.primes_checked = int(prime_idx.size)
    report.vacuous = prime_idx.size == 0 or not nonzero[idx].any()
    for n in bad_primes[:max_witnesses].tolist():
        report.witnesses.append((n, _value(source, n), "zero"))
    if bad_primes.size:
        return report

    report.verdict = DETECTS
    if strong:
        report.others_checked = int(other_idx.size)
        bad_others = other_idx[~nonzero[other_idx]]
        for n in bad_others[:max_witnesses].tolist():
            report.witnesses.append((n, _value(source, n), "nonzero"))
        if not bad_others.size:
            report.verdict = STRONGLY_DETECTS
    return report


# --- sign changes --------------------------------------------------------------


@dataclass
class SignChangeReport:
    count: int
    positions: list  # (previous prime, prime where the sign flipped)
    bound: int
    progression: Progression
    nonzero_terms: int
    signs: dict = field(default_factory=dict)  # sign -> number of primes with that sign

    def to_json(self) -> dict:
        return {
            "count": str(self.count),
            "bound": str(self.bound),
            "progression": str(self.progression),
            "nonzero_terms": str(self.nonzero_terms),
            "positive": str(self.signs.get(1, 0)),
            "negative": str(self.signs.get(-1, 0)),
            "positions": [[str(a), str(b)] for a, b in self.positions],
        }


def _rational_sign(source, n: int) -> int:
    if isinstance(source, Sequence) and not isinstance(source, QSeries):
        v = source[n]
        if isinstance(v, int):
            return (v > 0) - (v < 0)
    value = _value(source, n)
    if not value.is_rational():
        raise NonRealCoefficientError(f"coefficient at n={n} is not rational: {value}")
    return value.sign()


def sign_changes(source, progression: Progression | None = None, bound: int = 1000) -> SignChangeReport:
    """Count adjacent sign flips of ``c(p)`` over primes ``p <= bound`` in the progression.

    Zero coefficients are skipped.  A non-rational coefficient raises
    :class:`NonRealCoefficientError` naming its index.
    """
    progression = progression or Progression.everything()
    primes = prime_mask(bound)
    count, positions, signs = 0, [], {1: 0, -1: 0}
    prev_sign, prev_p = 0, None
    for p in progression.members(bound, start=2):
        if not primes[p]:
            continue
        s = _rational_sign(source, p)
        if s == 0:
            continue
        signs[s] += 1
        if prev_sign and s != prev_sign:
            count += 1
            positions.append((prev_p, p))
        prev_sign, prev_p = s, p
    return SignChangeReport(count, positions, bound, progression, signs[1] + signs[-1], signs)


def format_value(value: CycValue) -> str:
    return rational_to_str(value.to_rational()) if value.is_rational() else str(value)


SourceLike = QSeries | Sequence | Callable
