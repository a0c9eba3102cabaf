"""Eisenstein series with character, the H-basis and finite prime checks.

Conventions
-----------
* ``E_{k,chi,psi} = delta(chi) L(1-k, psi) + 2 sum sigma^{chi,psi}_{k-1}(n) q^n``
  with ``sigma^{chi,psi}_{k-1}(n) = sum_{d | n} chi(n/d) psi(d) d^{k-1}``.
  ``delta(chi)`` is 1 exactly when ``chi`` is principal (it multiplies the
  constant term of the *first* character's slot).
* ``L(1-k, psi) = -B_{k,psi}/k`` with ``B_{k,psi}`` computed for the
  primitive character inducing ``psi`` (no Euler factors for imprimitive psi).
* ``E_2 = 1 - 24 sum sigma_1(n) q^n``; the rescaled ``E2hat = -E_2/12``
  follows the pattern above with trivial characters.
* Weight 0 gives the zero series.
* ``H_{k,l,chi,psi} = conj(chi(m)) D^{l-1} E_{k,psi,chi} - psi(m) E_{l,conj psi,conj chi}``.
  Constituents are built from the q-expansion formula even when the parity
  condition fails, so ``H`` is defined for every ``(k, l)``; ``HSpec.is_modular``
  says whether both constituents are genuine Eisenstein series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from qmprime.algebra import (
    CycValue,
    DirichletCharacter,
    character_value,
    enumerate_characters,
    reduction_matrix,
)
from qmprime.ntheory import divisors, euler_phi, is_prime, lcm, primes_in_progression
from qmprime.qseries import QSeries, _obj_zeros


class ParityError(ValueError):
    """``chi(-1) psi(-1) != (-1)^k`` for an Eisenstein series requested strictly."""


class NonRealCoefficientError(ValueError):
    """A sign was requested for a coefficient that is not real."""


class InsufficientPrimesError(ValueError):
    def __init__(self, required: int, given: int):
        super().__init__(f"need at least {required} primes, got {given}")
        self.required = required
        self.given = given


# --- Bernoulli numbers --------------------------------------------------------


@lru_cache(maxsize=None)
def bernoulli_numbers(n: int) -> tuple[Fraction, ...]:
    """``B_0..B_n`` with ``B_1 = -1/2``."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(math.comb(m + 1, j) * B[j] for j in range(m)) / (m + 1))
    return tuple(B)


def bernoulli_poly(k: int, x: Fraction) -> Fraction:
    B = bernoulli_numbers(k)
    return sum((math.comb(k, j) * B[j] * x ** (k - j) for j in range(k + 1)), Fraction(0))


def gen_bernoulli(k: int, psi: DirichletCharacter) -> CycValue:
    """``B_{k,psi} = f^{k-1} sum_{a=1}^{f} psi(a) B_k(a/f)``, ``f`` the conductor."""
    if k < 1:
        raise ValueError("k must be positive")
    prim = psi.primitive()
    f = prim.modulus
    acc = CycValue.zero(prim.order)
    for a in range(1, f + 1):
        v = character_value(prim, a)
        if v:
            acc = acc + v * bernoulli_poly(k, Fraction(a, f))
    return acc * Fraction(f) ** (k - 1)


def l_value(k: int, psi: DirichletCharacter) -> CycValue:
    """``L(1-k, psi) = -B_{k,psi} / k``."""
    return gen_bernoulli(k, psi) * Fraction(-1, k)


# --- divisor sums --------------------------------------------------------------


def sigma_weighted(k_minus_1: int, chi: DirichletCharacter, psi: DirichletCharacter, n: int) -> CycValue:
    """``sum_{d | n} chi(n/d) psi(d) d^{k-1}``."""
    if n < 1:
        raise ValueError("n must be positive")
    acc = CycValue.zero(lcm(chi.order, psi.order))
    for d in divisors(n):
        acc = acc + character_value(chi, n // d) * character_value(psi, d) * d**k_minus_1
    return acc


def _scaled_exponents(chi: DirichletCharacter, nmax: int, L: int) -> np.ndarray:
    e = chi.exponent_table[np.arange(nmax + 1) % chi.modulus].copy()
    ok = e >= 0
    e[ok] *= L // chi.order
    return e


@lru_cache(maxsize=512)
def _sigma_table(k_minus_1: int, chi: DirichletCharacter, psi: DirichletCharacter, nmax: int) -> tuple[np.ndarray, int]:
    """Power-basis rows of ``sigma^{chi,psi}_{k-1}(n)`` for ``0 <= n <= nmax`` (row 0 is zero)."""
    L = lcm(chi.order, psi.order)
    a = _scaled_exponents(chi, nmax, L)
    b = _scaled_exponents(psi, nmax, L)
    ring = _obj_zeros((nmax + 1, L))
    for d in range(1, nmax + 1):
        if b[d] < 0:
            continue
        js = np.arange(1, nmax // d + 1)
        av = a[js]
        ok = av >= 0
        ring[d * js[ok], (av[ok] + b[d]) % L] += d**k_minus_1
    table = ring.dot(reduction_matrix(L)) if L > 1 else ring
    table.setflags(write=False)
    return table, L


# --- Eisenstein specs ------------------------------------------------------------

_KINDS = ("standard", "E2", "E2hat")


@dataclass(frozen=True)
class EisensteinSpec:
    """``D^ell E_{k,chi,psi} | V_delta``, or the ``E2`` / ``E2hat`` series (kind)."""

    k: int
    chi: DirichletCharacter = field(default_factory=DirichletCharacter.principal)
    psi: DirichletCharacter = field(default_factory=DirichletCharacter.principal)
    ell: int = 0
    delta: int = 1
    kind: str = "standard"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        if self.kind == "standard" and not (self.k == 0 or self.k >= 2):
            raise ValueError("weight must be 0 (zero series) or at least 2")
        if self.ell < 0 or self.delta < 1:
            raise ValueError("ell must be >= 0 and delta >= 1")

    @classmethod
    def e2(cls, ell: int = 0, delta: int = 1, normalized: bool = False) -> EisensteinSpec:
        return cls(2, ell=ell, delta=delta, kind="E2hat" if normalized else "E2")

    @property
    def parity_ok(self) -> bool:
        if self.kind != "standard" or self.k == 0:
            return True
        return self.chi.parity * self.psi.parity == (-1) ** self.k

    @property
    def weight(self) -> int:
        return self.k + 2 * self.ell

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "k": self.k, "ell": self.ell, "delta": self.delta}
        if self.kind == "standard":
            out["chi"] = self.chi.to_json()
            out["psi"] = self.psi.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> EisensteinSpec:
        kind = obj.get("kind", "standard")
        if kind == "standard":
            return cls(
                int(obj["k"]),
                DirichletCharacter.from_json(obj.get("chi", {"modulus": 1, "index": 0})),
                DirichletCharacter.from_json(obj.get("psi", {"modulus": 1, "index": 0})),
                int(obj.get("ell", 0)),
                int(obj.get("delta", 1)),
            )
        return cls(2, ell=int(obj.get("ell", 0)), delta=int(obj.get("delta", 1)), kind=kind)

    def __str__(self) -> str:
        base = self.kind if self.kind != "standard" else f"E[{self.k},{self.chi.label()},{self.psi.label()}]"
        if self.ell:
            base = f"D^{self.ell} {base}"
        if self.delta > 1:
            base += f"|V_{self.delta}"
        return base


def eisenstein_qexp(spec: EisensteinSpec, nmax: int, strict: bool = True) -> QSeries:
    """q-expansion of ``spec`` up to ``q^nmax``.

    With ``strict`` a parity violation raises :class:`ParityError`; otherwise
    the formal series defined by the same coefficient formula is returned.
    """
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    if strict and not spec.parity_ok:
        raise ParityError(
            f"chi(-1) psi(-1) = {spec.chi.parity * spec.psi.parity} but (-1)^k = {(-1) ** spec.k} for {spec}"
        )
    if spec.kind != "standard":
        table, _ = _sigma_table(1, DirichletCharacter.principal(), DirichletCharacter.principal(), nmax)
        rows = table.copy()
        if spec.kind == "E2":
            rows *= -24
            rows[0, 0] = 1
        else:
            rows *= 2
            rows[0, 0] = Fraction(-1, 12)
        f = QSeries(rows, 1, 1)
    elif spec.k == 0:
        f = QSeries.zero(nmax)
    else:
        table, L = _sigma_table(spec.k - 1, spec.chi, spec.psi, nmax)
        rows = table * 2
        if spec.chi.is_principal:
            rows[0] = l_value(spec.k, spec.psi).embed(L).coords
        f = QSeries(rows, L, spec.chi.modulus * spec.psi.modulus)
    return f.derivative(spec.ell).v(spec.delta) if spec.delta > 1 else f.derivative(spec.ell)


# --- linear combinations ----------------------------------------------------------

Combination = list  # list[tuple[CycValue, EisensteinSpec]]


def combination_qexp(combination: Sequence, nmax: int, strict: bool = False) -> QSeries:
    out = QSeries.zero(nmax)
    for coeff, spec in combination:
        out = out + eisenstein_qexp(spec, nmax, strict=strict).scale(coeff)
    return out


def combination_to_json(combination: Sequence) -> list:
    return [{"coeff": CycValue.coerce(c).to_json(), "series": s.to_json()} for c, s in combination]


def combination_from_json(items: Sequence) -> list:
    out = []
    for i, item in enumerate(items):
        try:
            if "h" in item:
                h = HSpec.from_json(item["h"])
                scale = CycValue.from_json(item.get("coeff", "1/1"))
                out.extend((scale * c, s) for c, s in h.constituents())
            else:
                out.append((CycValue.from_json(item.get("coeff", "1/1")), EisensteinSpec.from_json(item["series"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"term {i}: {exc}") from exc
    return out


# --- H basis ------------------------------------------------------------------------


@dataclass(frozen=True)
class HSpec:
    """Parameters of ``H_{k,l,chi,psi}`` for the progression ``m mod M``."""

    k: int
    l: int
    chi: DirichletCharacter
    psi: DirichletCharacter
    m: int

    def __post_init__(self):
        if self.k < 2 or self.l < 2:
            raise ValueError("H needs k >= 2 and l >= 2")
        if self.chi.modulus != self.psi.modulus:
            raise ValueError("chi and psi must share a modulus")
        if math.gcd(self.m, self.M) != 1:
            raise ValueError(f"residue {self.m} is not coprime to {self.M}")

    @property
    def M(self) -> int:
        return self.chi.modulus

    @property
    def K(self) -> int:
        return self.k + self.l

    def constituents(self) -> list:
        chi_m = character_value(self.chi, self.m)
        psi_m = character_value(self.psi, self.m)
        return [
            (chi_m.conj(), EisensteinSpec(self.k, self.psi, self.chi, ell=self.l - 1)),
            (-psi_m, EisensteinSpec(self.l, self.psi.conjugate(), self.chi.conjugate())),
        ]

    @property
    def is_modular(self) -> bool:
        return all(spec.parity_ok for _, spec in self.constituents())

    def key(self) -> tuple:
        return (self.k, self.l, self.chi.index, self.psi.index)

    def to_json(self) -> dict:
        return {"k": self.k, "l": self.l, "chi": self.chi.index, "psi": self.psi.index, "m": self.m, "M": self.M}

    @classmethod
    def from_json(cls, obj: dict) -> HSpec:
        M = int(obj["M"])
        return cls(
            int(obj["k"]),
            int(obj["l"]),
            DirichletCharacter.from_index(M, int(obj["chi"])),
            DirichletCharacter.from_index(M, int(obj["psi"])),
            int(obj["m"]),
        )

    def __str__(self) -> str:
        return f"H[{self.k},{self.l},{self.chi.label()},{self.psi.label()}; m={self.m}]"


def h_qexp(spec: HSpec, nmax: int) -> QSeries:
    return combination_qexp(spec.constituents(), nmax, strict=False)


def h_difference(h1: HSpec, h2: HSpec) -> list:
    return h1.constituents() + [(-c, s) for c, s in h2.constituents()]


def spanning_set(K: int, M: int, m: int, parity: str = "strict") -> list[tuple[HSpec, HSpec]]:
    """All unordered pairs of distinct H-parameters with ``k + l = K``.

    ``parity="strict"`` keeps only H whose two constituents satisfy the parity
    condition; ``"formal"`` keeps every ``(k, l, chi, psi)``.
    """
    if K < 4:
        raise ValueError("K must be at least 4")
    if parity not in ("strict", "formal"):
        raise ValueError("parity must be 'strict' or 'formal'")
    chars = enumerate_characters(M)
    points = []
    for k in range(2, K - 1):
        for chi in chars:
            for psi in chars:
                h = HSpec(k, K - k, chi, psi, m)
                if parity == "formal" or h.is_modular:
                    points.append(h)
    points.sort(key=HSpec.key)
    return list(combinations(points, 2))


# --- prime coefficient polynomials ---------------------------------------------------


@dataclass(frozen=True)
class PrimeCoefficientPolynomial:
    """``c_f(p) = sum_r beta[r] p^r`` for primes ``p ≡ m (mod M)`` coprime to ``M``."""

    m: int
    M: int
    beta: dict = field(hash=False)
    degree_bound: int = 0

    def evaluate(self, p: int) -> CycValue:
        acc = CycValue.zero()
        for r, b in self.beta.items():
            acc = acc + b * p**r
        return acc

    def is_zero(self) -> bool:
        return not self.beta

    def leading(self) -> tuple[int, CycValue] | None:
        if not self.beta:
            return None
        r = max(self.beta)
        return r, self.beta[r]

    def __sub__(self, other: PrimeCoefficientPolynomial) -> PrimeCoefficientPolynomial:
        if (self.m - other.m) % self.M or self.M != other.M:
            raise ValueError("polynomials belong to different progressions")
        beta = dict(self.beta)
        for r, b in other.beta.items():
            beta[r] = beta.get(r, CycValue.zero()) - b
        return PrimeCoefficientPolynomial(
            self.m, self.M, {r: b for r, b in beta.items() if b}, max(self.degree_bound, other.degree_bound)
        )

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "M": self.M,
            "degree_bound": self.degree_bound,
            "beta": {str(r): self.beta[r].to_json() for r in sorted(self.beta)},
        }

    @classmethod
    def from_json(cls, obj: dict) -> PrimeCoefficientPolynomial:
        beta = {int(r): CycValue.from_json(v) for r, v in obj.get("beta", {}).items()}
        return cls(int(obj["m"]), int(obj["M"]), {r: b for r, b in beta.items() if b}, int(obj["degree_bound"]))

    def __str__(self) -> str:
        if not self.beta:
            return "0"
        return " + ".join(f"({self.beta[r]})*p^{r}" for r in sorted(self.beta))


def prime_coefficient_polynomial(combination: Sequence, m: int, M: int) -> PrimeCoefficientPolynomial:
    """Exact polynomial in ``p`` for ``c_f(p)``, ``f`` a combination of Eisenstein specs."""
    if M < 1 or math.gcd(m, M) != 1:
        raise ValueError(f"progression {m} mod {M} must have gcd(m, M) = 1")
    beta: dict[int, CycValue] = {}
    r_max = 0

    def bump(r: int, v: CycValue) -> None:
        beta[r] = beta.get(r, CycValue.zero()) + v

    for coeff, spec in combination:
        coeff = CycValue.coerce(coeff)
        if spec.delta != 1:
            raise ValueError(f"{spec}: V_delta terms are not supported in prime polynomials")
        if spec.kind in ("E2", "E2hat"):
            w = -24 if spec.kind == "E2" else 2
            bump(spec.ell, coeff * w)
            bump(spec.ell + 1, coeff * w)
            r_max = max(r_max, spec.ell + 1)
            continue
        if spec.k == 0:
            continue
        for ch in (spec.chi, spec.psi):
            if M % ch.modulus:
                raise ValueError(f"{spec}: character modulus {ch.modulus} does not divide {M}")
        bump(spec.ell, coeff * character_value(spec.chi, m) * 2)
        bump(spec.ell + spec.k - 1, coeff * character_value(spec.psi, m) * 2)
        r_max = max(r_max, spec.ell + spec.k - 1)
    return PrimeCoefficientPolynomial(m % M, M, {r: b for r, b in sorted(beta.items()) if b}, r_max)


def _real_sign(v: CycValue) -> int:
    if v.is_rational():
        return v.sign()
    if not v.is_real():
        raise NonRealCoefficientError(f"leading coefficient {v} is not real")
    x = v.to_complex().real
    if abs(x) < 1e-9:
        raise ArithmeticError(f"cannot resolve the sign of {v} in floating point")
    return 1 if x > 0 else -1


def eisenstein_sign(poly: PrimeCoefficientPolynomial) -> int:
    """Eventual sign of ``c_f(p)`` along the progression: sign of the top coefficient."""
    lead = poly.leading()
    if lead is None:
        return 0
    return _real_sign(lead[1])


# --- finite checks ---------------------------------------------------------------------


def solve_vandermonde(points: Sequence[int], values: Sequence[CycValue]) -> list[CycValue]:
    """Coefficients ``b_0..b_{n-1}`` with ``sum_r b_r x_i^r = values[i]`` (exact, Newton form)."""
    n = len(points)
    if len(set(points)) != n:
        raise ValueError("interpolation points must be distinct")
    if n == 0:
        return []
    order = lcm(*(CycValue.coerce(v).order for v in values))
    cols = [list(CycValue.coerce(v).embed(order).coords) for v in values]
    phi = euler_phi(order)
    out = [[Fraction(0)] * phi for _ in range(n)]
    for c in range(phi):
        dd = [Fraction(col[c]) for col in cols]
        for j in range(1, n):
            for i in range(n - 1, j - 1, -1):
                dd[i] = (dd[i] - dd[i - 1]) / (points[i] - points[i - j])
        poly = [Fraction(0)] * n
        for i in range(n - 1, -1, -1):
            # poly = poly * (x - points[i]) + dd[i]
            new = [Fraction(0)] * n
            for r in range(n - 1):
                new[r + 1] += poly[r]
                new[r] -= poly[r] * points[i]
            new[0] += dd[i]
            poly = new
        for r in range(n):
            out[r][c] = poly[r]
    return [CycValue(order, row) for row in out]


@dataclass
class FiniteCheckCertificate:
    verdict: str
    polynomial: PrimeCoefficientPolynomial
    primes: list
    values: list
    witness: tuple | None = None
    recovered: list = field(default_factory=list)

    @property
    def detects(self) -> bool:
        return self.verdict == "detects"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": None if self.witness is None else {"p": self.witness[0], "value": self.witness[1].to_json()},
            "polynomial": self.polynomial.to_json(),
            "primes": list(self.primes),
        }


def finite_prime_check(
    poly: PrimeCoefficientPolynomial,
    primes: Sequence[int] | str = "auto",
    values: Callable[[int], CycValue] | None = None,
) -> FiniteCheckCertificate:
    """Certify ``c_f(p) = 0`` on the whole progression from ``degree_bound + 1`` primes.

    ``values`` supplies ``c_f(p)`` (e.g. from a q-expansion); by default the
    polynomial itself is evaluated.  When every supplied value vanishes, the
    square Vandermonde system forces all coefficients to zero.
    """
    need = poly.degree_bound + 1
    if isinstance(primes, str):
        if primes != "auto":
            raise ValueError("primes must be 'auto' or a list")
        primes = primes_in_progression(poly.m, poly.M, need)
    primes = [int(p) for p in primes]
    if len(set(primes)) != len(primes):
        raise ValueError("primes must be distinct")
    for p in primes:
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if (p - poly.m) % poly.M:
            raise ValueError(f"{p} is not ≡ {poly.m} (mod {poly.M})")
    if len(primes) < need:
        raise InsufficientPrimesError(need, len(primes))
    get = values or poly.evaluate
    vals = [CycValue.coerce(get(p)) for p in primes]
    if any(vals[:need]):
        recovered = solve_vandermonde(primes[:need], vals[:need])
    else:
        # homogeneous square Vandermonde system: the only solution is zero
        recovered = [CycValue.zero()] * need
    for p, v in zip(primes, vals):
        if v:
            return FiniteCheckCertificate("refuted", poly, primes, vals, (p, v), recovered)
    return FiniteCheckCertificate("detects", poly, primes, vals, None, recovered)
