"""Formal zeta-product expressions ``W(s) = sum_j A_j zeta(s - l_j) zeta(s - l_j - k_j)``.

``W`` has Dirichlet coefficients ``a(n) = sum_j A_j n^{l_j} sigma_{k_j}(n)``.
This module extracts those coefficients, tracks the zeta exponent vector of
``Z_W = prod (zeta(s - l_j) zeta(s - l_j - k_j))^{A_j}``, rewrites ``W`` as an
integral combination of four-term quadruple expressions ``W_m`` when
``Z_W = 1``, and certifies vanishing of ``a(p)`` at all primes in three
independent ways.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from qmprime.algebra import rational_to_str, to_fraction
from qmprime.ntheory import divisors, is_prime, primes_up_to


class PreconditionError(ValueError):
    """The zeta exponent vector of the expression is not empty."""


class DecompositionError(RuntimeError):
    """Internal inconsistency during peel-off (should be unreachable)."""


# --- expressions -----------------------------------------------------------------


class WExpression:
    """Canonical map ``(l, k) -> A`` with zero coefficients dropped.

    The key ``(l, k)`` stands for ``zeta(s - l) zeta(s - l - k)``; since ``k >= 0``
    it is the unordered shift pair ``{l, l + k}`` with ``l`` the smaller shift.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[tuple] = ()):
        acc: dict[tuple[int, int], Fraction] = {}
        for A, l, k in terms:
            l, k = int(l), int(k)
            if l < 0 or k < 0:
                raise ValueError(f"shifts must be non-negative, got l={l}, k={k}")
            key = (l, k)
            acc[key] = acc.get(key, Fraction(0)) + to_fraction(A)
        self._terms = {key: A for key, A in sorted(acc.items()) if A}

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> WExpression:
        """Build from ``(A, a, b)`` meaning ``A zeta(s - a) zeta(s - b)``."""
        return cls((A, min(a, b), abs(a - b)) for A, a, b in pairs)

    @property
    def terms(self) -> list[tuple[Fraction, int, int]]:
        return [(A, l, k) for (l, k), A in self._terms.items()]

    def coefficient(self, l: int, k: int) -> Fraction:
        return self._terms.get((l, k), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WExpression):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    def __add__(self, other: WExpression) -> WExpression:
        return WExpression(self.terms + other.terms)

    def __neg__(self) -> WExpression:
        return WExpression((-A, l, k) for A, l, k in self.terms)

    def __sub__(self, other: WExpression) -> WExpression:
        return self + (-other)

    def __mul__(self, c) -> WExpression:
        c = to_fraction(c)
        return WExpression((c * A, l, k) for A, l, k in self.terms)

    __rmul__ = __mul__

    @property
    def R(self) -> int:
        """Top shift degree ``max_j (l_j + k_j)``; -1 for the zero expression."""
        return max((l + k for (l, k) in self._terms), default=-1)

    @property
    def S(self) -> Fraction:
        """Total ``|A_j|`` over the terms of top degree."""
        R = self.R
        return sum((abs(A) for (l, k), A in self._terms.items() if l + k == R), Fraction(0))

    def denominator(self) -> int:
        return math.lcm(*(A.denominator for A in self._terms.values())) if self._terms else 1

    def to_json(self) -> dict:
        return {"terms": [[rational_to_str(A), l, k] for A, l, k in self.terms]}

    @classmethod
    def from_json(cls, obj) -> WExpression:
        items = obj["terms"] if isinstance(obj, dict) else obj
        return cls((to_fraction(str(A)), int(l), int(k)) for A, l, k in items)

    def __repr__(self) -> str:
        return f"WExpression({[(str(A), l, k) for A, l, k in self.terms]})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"({A})*zeta(s-{l})*zeta(s-{l + k})" for A, l, k in self.terms)


def parse_terms(text: str) -> WExpression:
    """Parse ``"A,l,k;A,l,k;..."`` (A may be ``p/q``)."""
    terms = []
    for pos, chunk in enumerate(filter(None, (c.strip() for c in text.split(";")))):
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 3:
            raise ValueError(f"term {pos + 1} ({chunk!r}): expected 'A,l,k'")
        try:
            terms.append((to_fraction(parts[0]), int(parts[1]), int(parts[2])))
        except ValueError as exc:
            raise ValueError(f"term {pos + 1} ({chunk!r}): {exc}") from exc
    return WExpression(terms)


def from_divisor_expression(terms: Iterable[tuple]) -> WExpression:
    """``a(n) = sum A n^l sigma_k(n)`` as a canonical zeta-product expression."""
    return WExpression(terms)


# --- coefficients -------------------------------------------------------------------


def coefficient_a(W: WExpression, n: int) -> Fraction:
    """``a(n) = sum_j A_j n^{l_j} sigma_{k_j}(n)``."""
    if n < 1:
        raise ValueError("n must be positive")
    divs = divisors(n)
    return sum((A * n**l * sum(d**k for d in divs) for A, l, k in W.terms), Fraction(0))


def prime_coefficient(W: WExpression, p: int) -> Fraction:
    """``a(p) = sum_j A_j (p^{l_j} + p^{l_j + k_j})``, valid at primes."""
    return sum((A * (p**l + p ** (l + k)) for A, l, k in W.terms), Fraction(0))


def zeta_exponents(W: WExpression) -> dict[int, Fraction]:
    """Exponent ``B`` of ``zeta(s - m)`` in ``Z_W``, zero entries omitted."""
    acc: dict[int, Fraction] = {}
    for A, l, k in W.terms:
        acc[l] = acc.get(l, Fraction(0)) + A
        acc[l + k] = acc.get(l + k, Fraction(0)) + A
    return {m: B for m, B in sorted(acc.items()) if B}


# --- quadruples -------------------------------------------------------------------------

Quadruple = tuple  # (m1, m2, m3, m4)


def quadruple_expression(m: Sequence[int]) -> WExpression:
    """``z(m1)z(m3) + z(m2)z(m4) - z(m1)z(m4) - z(m2)z(m3)`` with ``z(a) = zeta(s - a)``."""
    m1, m2, m3, m4 = (int(x) for x in m)
    if min(m1, m2, m3, m4) < 0:
        raise ValueError(f"quadruple {tuple(m)} has a negative shift")
    return WExpression.from_pairs([(1, m1, m3), (1, m2, m4), (-1, m1, m4), (-1, m2, m3)])


def coefficient_a_quadruple(m: Sequence[int], n: int) -> Fraction:
    """``sum_{d | n} ((n/d)^{m2} - (n/d)^{m1}) (d^{m4} - d^{m3})``; any integer shifts."""
    if n < 1:
        raise ValueError("n must be positive")
    m1, m2, m3, m4 = (int(x) for x in m)
    total = Fraction(0)
    for d in divisors(n):
        e = n // d
        total += (Fraction(e) ** m2 - Fraction(e) ** m1) * (Fraction(d) ** m4 - Fraction(d) ** m3)
    return total


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


def sign_of_composite(m: Sequence[int], n: int) -> int:
    """Sign of ``a_m(n)`` at a composite ``n``: ``sgn(m2 - m1) sgn(m4 - m3)``."""
    if n < 4 or is_prime(n):
        raise ValueError(f"{n} is not composite")
    m1, m2, m3, m4 = (int(x) for x in m)
    return _sgn(m2 - m1) * _sgn(m4 - m3)


# --- peel-off decomposition -----------------------------------------------------------


@dataclass
class PeelResult:
    """Outcome of the peel-off loop on an integer-cleared expression."""

    steps: list  # [(coefficient, quadruple)] in peel order, before rescaling
    iterations: int
    bound: int
    denominator: int
    remainder: WExpression
    stuck: bool = False

    @property
    def complete(self) -> bool:
        return self.remainder.is_zero()


def iteration_bound(W: WExpression) -> int:
    """Upper bound on peel steps for ``W`` (after clearing denominators).

    Potential ``sum |A_j| 2^{l_j + k_j}``.  A step at top degree ``R >= 1``
    lowers the top-degree mass by at least one unit (two unless the partner
    term is ``zeta(s - R)^2``) and adds at most as many units of weight at most
    ``2^{R-1}``, so the potential drops by at least ``2^{R-1} >= 1``.
    """
    den = W.denominator()
    return int(sum(abs(A * den) * 2 ** (l + k) for A, l, k in W.terms))


def peel_off(W: WExpression) -> PeelResult:
    """Run the peel-off loop; stops at zero or when no opposite-sign partner exists.

    Selection rule: among top-degree terms take ``t`` of maximal ``k`` (ties
    cannot occur since keys are distinct), ``s = sgn(A_t)``; the partner ``j``
    is the lexicographically smallest ``(l, k)`` at top degree with
    ``sgn(A_j) = -s``.  The emitted quadruple is ``(l_t, l_j, l_t, l_t + k_t)``
    with coefficient ``-s`` and the update is ``W <- W + s W_m``.
    """
    den = W.denominator()
    cur = {(l, k): int(A * den) for A, l, k in W.terms}
    bound = iteration_bound(W)
    steps: list = []
    it = 0
    stuck = False
    while cur:
        R = max(l + k for l, k in cur)
        top = sorted((l, k) for (l, k) in cur if l + k == R)
        t = max(top, key=lambda key: key[1])
        s = 1 if cur[t] > 0 else -1
        partners = [key for key in top if (cur[key] > 0) != (s > 0)]
        if not partners:
            stuck = True
            break
        j = partners[0]
        if it >= bound:
            raise DecompositionError(f"peel-off exceeded its iteration bound {bound}")
        lt, kt = t
        quad = (lt, j[0], lt, lt + kt)
        for A, l, k in quadruple_expression(quad).terms:
            key = (l, k)
            v = cur.get(key, 0) + s * int(A)
            if v:
                cur[key] = v
            else:
                cur.pop(key, None)
        steps.append((-s, quad))
        it += 1
    remainder = WExpression((Fraction(A, den), l, k) for (l, k), A in cur.items())
    return PeelResult(steps, it, bound, den, remainder, stuck)


def expand(decomposition: Iterable[tuple]) -> WExpression:
    """``sum c W_m`` as a canonical expression."""
    out: list = []
    for c, quad in decomposition:
        out.extend((to_fraction(c) * A, l, k) for A, l, k in quadruple_expression(quad).terms)
    return WExpression(out)


def _merge(steps: Iterable[tuple], den: int) -> list[tuple[Fraction, tuple]]:
    acc: dict[tuple, Fraction] = {}
    for c, quad in steps:
        acc[quad] = acc.get(quad, Fraction(0)) + Fraction(c, den)
    return [(c, quad) for quad, c in sorted(acc.items()) if c]


def decompose(W: WExpression) -> list[tuple[Fraction, tuple]]:
    """Write ``W`` as ``sum c_m W_m``; requires an empty zeta exponent vector.

    Returns ``[(c, (m1, m2, m3, m4)), ...]`` sorted by quadruple, equal
    quadruples merged.
    """
    exps = zeta_exponents(W)
    if exps:
        raise PreconditionError(f"zeta exponent vector is not empty: {exps}")
    res = peel_off(W)
    if res.stuck:
        raise DecompositionError("no opposite-sign partner at top degree despite empty exponent vector")
    out = _merge(res.steps, res.denominator)
    if expand(out) != W:
        raise DecompositionError("decomposition does not re-expand to the input")
    return out


# --- certification ------------------------------------------------------------------------

MODES = ("exponents", "primes", "decomposition")


@dataclass
class WCertificate:
    mode: str
    verdict: str
    witness: tuple | None = None
    decomposition: list | None = None
    exponents: dict | None = None
    primes: list = field(default_factory=list)
    iterations: int | None = None
    iteration_bound: int | None = None

    @property
    def detects(self) -> bool:
        return self.verdict == "detects"

    def to_json(self) -> dict:
        out: dict = {"mode": self.mode, "verdict": self.verdict}
        out["witness"] = None if self.witness is None else {"p": self.witness[0], "a": rational_to_str(self.witness[1])}
        if self.decomposition is not None:
            out["decomposition"] = [[rational_to_str(c), list(q)] for c, q in self.decomposition]
        if self.exponents is not None:
            out["exponents"] = {str(m): rational_to_str(B) for m, B in self.exponents.items()}
        if self.primes:
            out["primes"] = list(self.primes)
        if self.iterations is not None:
            out["iterations"] = self.iterations
            out["iteration_bound"] = self.iteration_bound
        return out


def certify_prime_detection(W: WExpression, mode: str = "exponents", prime_count: int | None = None) -> WCertificate:
    """Decide whether ``a(p) = 0`` for every prime ``p``.

    * ``exponents``: the zeta exponent vector is empty.
    * ``primes``: ``a(p) = 0`` at the first ``prime_count`` primes, default
      ``R_W + 1`` (``a(p)`` is a polynomial of degree at most ``R_W`` in ``p``).
      Smaller counts are accepted for experiments but are not sound in general.
    * ``decomposition``: the peel-off loop, run without consulting the exponent
      vector, reaches zero and the result re-expands to ``W``.
    """
    if mode == "exponents":
        exps = zeta_exponents(W)
        return WCertificate(mode, "refuted" if exps else "detects", exponents=exps)
    if mode == "primes":
        count = prime_count if prime_count is not None else max(W.R, 0) + 1
        if count < 1:
            raise ValueError("prime_count must be positive")
        primes = _first_primes(count)
        for p in primes:
            a = coefficient_a(W, p)
            if a:
                return WCertificate(mode, "refuted", witness=(p, a), primes=primes)
        return WCertificate(mode, "detects", primes=primes)
    if mode == "decomposition":
        res = peel_off(W)
        if res.complete:
            dec = _merge(res.steps, res.denominator)
            ok = expand(dec) == W
            return WCertificate(
                mode, "detects" if ok else "refuted", decomposition=dec, iterations=res.iterations, iteration_bound=res.bound
            )
        return WCertificate(mode, "refuted", iterations=res.iterations, iteration_bound=res.bound)
    raise ValueError(f"mode must be one of {MODES}")


def certify_all(W: WExpression, prime_count: int | None = None) -> dict[str, WCertificate]:
    return {mode: certify_prime_detection(W, mode, prime_count) for mode in MODES}


def _first_primes(count: int) -> list[int]:
    bound = 16
    while True:
        ps = primes_up_to(bound)
        if len(ps) >= count:
            return ps[:count]
        bound *= 2
