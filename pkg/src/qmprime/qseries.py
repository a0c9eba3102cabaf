"""Truncated q-expansions over cyclotomic fields and the operator algebra on them.

Coefficients are held densely as an object array of shape
``(truncation + 1, phi(order))``: row ``n`` is the power-basis coordinate
vector of ``c(n)`` in ``Q(zeta_order)``.  Entries are Python ints or
Fractions, so every operation is exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from qmprime import _kernels
from qmprime.algebra import (
    CycValue,
    DirichletCharacter,
    _power_table,
    to_fraction,
)
from qmprime.ntheory import euler_phi, is_prime, lcm


def _embedding_matrix(src: int, dst: int) -> np.ndarray:
    step = dst // src
    table = _power_table(dst)
    return np.array([table[i * step] for i in range(euler_phi(src))], dtype=object).reshape(
        euler_phi(src), euler_phi(dst)
    )


def _mult_matrix(s: CycValue) -> np.ndarray:
    """Matrix ``S`` with ``coords(x) @ S == coords(x * s)`` in ``Q(zeta_{s.order})``."""
    phi = euler_phi(s.order)
    rows = [(CycValue.root_of_unity(s.order, i) * s).coords for i in range(phi)]
    return np.array(rows, dtype=object).reshape(phi, phi)


def _obj_zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(0)
    return out


class QSeries:
    """Truncated q-expansion ``sum_{n <= truncation} c(n) q^n`` with level metadata.

    ``level`` is pessimistic bookkeeping: the true level divides it.
    """

    __slots__ = ("_a", "order", "level")

    def __init__(self, coords: np.ndarray, order: int = 1, level: int = 1):
        coords = np.asarray(coords, dtype=object)
        if coords.ndim != 2 or coords.shape[1] != euler_phi(order) or coords.shape[0] < 1:
            raise ValueError(f"coefficient array must have shape (N+1, {euler_phi(order)})")
        if level < 1:
            raise ValueError("level must be positive")
        self._a = coords
        self.order = int(order)
        self.level = int(level)

    # construction
    @classmethod
    def from_values(cls, values: Sequence, level: int = 1) -> QSeries:
        vals = [CycValue.coerce(v) for v in values]
        order = lcm(*(v.order for v in vals)) if vals else 1
        rows = [v.embed(order).coords for v in vals]
        return cls(np.array(rows, dtype=object).reshape(len(vals), euler_phi(order)), order, level)

    @classmethod
    def from_integers(cls, values: Iterable, level: int = 1) -> QSeries:
        col = np.array([int(v) for v in values], dtype=object)
        return cls(col.reshape(-1, 1), 1, level)

    @classmethod
    def zero(cls, truncation: int, order: int = 1, level: int = 1) -> QSeries:
        return cls(_obj_zeros((truncation + 1, euler_phi(order))), order, level)

    @classmethod
    def monomial(cls, n: int, truncation: int, coeff=1, level: int = 1) -> QSeries:
        c = CycValue.coerce(coeff)
        out = _obj_zeros((truncation + 1, euler_phi(c.order)))
        if n <= truncation:
            out[n] = c.coords
        return cls(out, c.order, level)

    # access
    @property
    def truncation(self) -> int:
        return self._a.shape[0] - 1

    @property
    def coords(self) -> np.ndarray:
        return self._a

    def __len__(self) -> int:
        return self._a.shape[0]

    def __getitem__(self, n: int) -> CycValue:
        if not 0 <= n <= self.truncation:
            raise IndexError(f"coefficient {n} beyond truncation {self.truncation}")
        return CycValue(self.order, self._a[n])

    def coefficients(self) -> list[CycValue]:
        return [CycValue(self.order, row) for row in self._a]

    def is_rational(self) -> bool:
        return self._a.shape[1] == 1 or not self._a[:, 1:].any()

    def rational_coefficients(self) -> list[Fraction]:
        if not self.is_rational():
            raise ValueError("series has non-rational coefficients")
        return [to_fraction(x) for x in self._a[:, 0]]

    def support(self) -> list[int]:
        return [int(n) for n in np.flatnonzero(np.any(self._a != 0, axis=1))]

    def is_zero(self) -> bool:
        return not np.any(self._a != 0)

    # order / truncation
    def embed(self, order: int) -> QSeries:
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError(f"cannot embed order {self.order} into {order}")
        return QSeries(self._a.dot(_embedding_matrix(self.order, order)), order, self.level)

    def truncate(self, truncation: int) -> QSeries:
        if truncation > self.truncation:
            raise ValueError("cannot extend a truncated series")
        return QSeries(self._a[: truncation + 1].copy(), self.order, self.level)

    def with_level(self, level: int) -> QSeries:
        return QSeries(self._a, self.order, level)

    @staticmethod
    def _align(f: QSeries, g: QSeries) -> tuple[np.ndarray, np.ndarray, int]:
        L = lcm(f.order, g.order)
        n = min(f.truncation, g.truncation) + 1
        return f.embed(L)._a[:n], g.embed(L)._a[:n], L

    # arithmetic
    def __add__(self, other: QSeries) -> QSeries:
        if not isinstance(other, QSeries):
            return NotImplemented
        a, b, L = QSeries._align(self, other)
        return QSeries(a + b, L, lcm(self.level, other.level))

    def __neg__(self) -> QSeries:
        return QSeries(-self._a, self.order, self.level)

    def __sub__(self, other: QSeries) -> QSeries:
        if not isinstance(other, QSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, s) -> QSeries:
        s = CycValue.coerce(s)
        if s.is_rational():
            q = s.to_rational()
            q = q.numerator if q.denominator == 1 else q
            return QSeries(self._a * q, self.order, self.level)
        L = lcm(self.order, s.order)
        return QSeries(self.embed(L)._a.dot(_mult_matrix(s.embed(L))), L, self.level)

    def __mul__(self, other) -> QSeries:
        if isinstance(other, QSeries):
            return self.cauchy(other)
        return self.scale(other)

    def __rmul__(self, other) -> QSeries:
        return self.scale(other)

    def cauchy(self, other: QSeries) -> QSeries:
        a, b, L = QSeries._align(self, other)
        n = a.shape[0]
        phi = a.shape[1]
        level = lcm(self.level, other.level)
        if phi == 1:
            return QSeries(np.convolve(a[:, 0], b[:, 0])[:n].reshape(n, 1), L, level)
        slots = _obj_zeros((n, 2 * phi - 1))
        for i in range(phi):
            if not a[:, i].any():
                continue
            for j in range(phi):
                if b[:, j].any():
                    slots[:, i + j] += np.convolve(a[:, i], b[:, j])[:n]
        table = _power_table(L)
        red = np.array([table[t % L] for t in range(2 * phi - 1)], dtype=object).reshape(2 * phi - 1, phi)
        return QSeries(slots.dot(red), L, level)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        if self.truncation != other.truncation or self.level != other.level:
            return False
        a, b, _ = QSeries._align(self, other)
        return bool(np.all(a == b))

    def same_coefficients(self, other: QSeries, upto: int | None = None) -> bool:
        a, b, _ = QSeries._align(self, other)
        if upto is not None:
            a, b = a[: upto + 1], b[: upto + 1]
        return bool(np.all(a == b))

    __hash__ = None

    # operators
    def derivative(self, times: int = 1) -> QSeries:
        if times < 0:
            raise ValueError("derivative order must be non-negative")
        if times == 0:
            return self
        w = np.array([n**times for n in range(self.truncation + 1)], dtype=object)
        return QSeries(self._a * w[:, None], self.order, self.level)

    def v(self, d: int) -> QSeries:
        if d < 1:
            raise ValueError("V_d needs d >= 1")
        out = _obj_zeros(self._a.shape)
        src = self.truncation // d + 1
        out[::d][:src] = self._a[:src]
        return QSeries(out, self.order, self.level * d)

    def sieve(self, M: int, m: int) -> QSeries:
        if M < 1:
            raise ValueError("sieve modulus must be positive")
        keep = (np.arange(self.truncation + 1) - m) % M == 0
        out = self._a.copy()
        out[~keep] = 0
        return QSeries(out, self.order, lcm(self.level, M * M, M * self.level))

    def twist(self, chi: DirichletCharacter) -> QSeries:
        L = lcm(self.order, chi.order)
        a = self.embed(L)._a
        table = chi.exponent_table[np.arange(self.truncation + 1) % chi.modulus]
        out = _obj_zeros(a.shape)
        step = L // chi.order
        for e in np.unique(table):
            if e < 0:
                continue
            rows = table == e
            out[rows] = a[rows].dot(_mult_matrix(CycValue.root_of_unity(L, int(e) * step)))
        return QSeries(out, L, self.level * chi.modulus**2)

    # formats
    def to_json(self) -> dict:
        coeffs = {}
        for n in self.support():
            coeffs[str(n)] = self[n].to_json()
        return {"truncation": self.truncation, "level": self.level, "order": self.order, "coeffs": coeffs}

    @classmethod
    def from_json(cls, obj: dict) -> QSeries:
        N = int(obj["truncation"])
        vals = {int(n): CycValue.from_json(v) for n, v in obj.get("coeffs", {}).items()}
        order = lcm(int(obj.get("order", 1)), *(v.order for v in vals.values()))
        out = _obj_zeros((N + 1, euler_phi(order)))
        for n, v in vals.items():
            if not 0 <= n <= N:
                raise ValueError(f"coefficient index {n} outside 0..{N}")
            out[n] = v.embed(order).coords
        return cls(out, order, int(obj.get("level", 1)))

    def to_text(self) -> str:
        lines = [f"# truncation={self.truncation} level={self.level} order={self.order}"]
        for n in self.support():
            lines.append(f"{n}: {self[n]}")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        head = ", ".join(str(self[n]) for n in range(min(6, self.truncation + 1)))
        return f"QSeries(truncation={self.truncation}, level={self.level}, order={self.order}, [{head}, ...])"


# --- functional surface -----------------------------------------------------


def add(f: QSeries, g: QSeries) -> QSeries:
    return f + g


def mul(f: QSeries, g: QSeries) -> QSeries:
    return f.cauchy(g)


def scale(f: QSeries, s) -> QSeries:
    return f.scale(s)


def derivative_D(f: QSeries, times: int = 1) -> QSeries:
    """``D = q d/dq`` applied ``times`` times: ``c(n) -> n^times c(n)``."""
    return f.derivative(times)


def v_operator(f: QSeries, d: int) -> QSeries:
    """``f(q) -> f(q^d)``."""
    return f.v(d)


def sieve(f: QSeries, M: int, m: int) -> QSeries:
    """Keep only the coefficients with index ``≡ m (mod M)``."""
    return f.sieve(M, m)


def twist(f: QSeries, chi: DirichletCharacter) -> QSeries:
    return f.twist(chi)


# --- eta products and the discriminant ----------------------------------------


def _jacobi_cube_terms(length: int) -> tuple[np.ndarray, np.ndarray]:
    """Exponents and weights of ``prod (1 - q^n)^3 = sum (-1)^k (2k+1) q^{k(k+1)/2}``."""
    offs, wts = [], []
    k = 0
    while k * (k + 1) // 2 < length:
        offs.append(k * (k + 1) // 2)
        wts.append((-1) ** k * (2 * k + 1))
        k += 1
    return np.array(offs, dtype=np.int64), np.array(wts, dtype=np.int64)


def _crt_primes(bits: int) -> list[int]:
    primes, p = [], 2**31 - 1
    while sum(math.log2(q) for q in primes) <= bits:
        if is_prime(p):
            primes.append(p)
        p -= 2
    return primes


def _eta24_mod(length: int, p: int) -> np.ndarray:
    offs, wts = _jacobi_cube_terms(length)
    wmod = wts % p
    dense = np.zeros(length, dtype=np.int64)
    dense[offs] = wmod
    for _ in range(7):
        dense = _kernels.sparse_mulmod(dense, offs, wmod, p)
    return dense


def delta_coefficients(nmax: int) -> list[int]:
    """``tau(0..nmax)`` for ``q prod (1 - q^n)^24``, exact.

    Residues mod several primes near ``2**31`` are combined by CRT.  The
    modulus exceeds ``2 n^7 >= 2 d(n) n^{11/2} >= 2 |tau(n)|`` and the result
    is re-checked modulo one further prime.
    """
    if nmax < 1:
        raise ValueError("nmax must be at least 1")
    length = nmax
    bound_bits = 7 * math.log2(max(nmax, 2)) + 2
    primes = _crt_primes(bound_bits + 31)
    check_p, primes = primes[-1], primes[:-1]
    x = np.array(_eta24_mod(length, primes[0]).tolist(), dtype=object)
    modulus = primes[0]
    for p in primes[1:]:
        r = _eta24_mod(length, p)
        xm = np.array((x % p).tolist(), dtype=np.int64)
        inv = pow(modulus % p, -1, p)
        t = ((r - xm) % p * inv) % p
        x = x + modulus * np.array(t.tolist(), dtype=object)
        modulus *= p
    half = modulus // 2
    x = np.where(x > half, x - modulus, x)
    check = _eta24_mod(length, check_p)
    if not np.array_equal(np.array((x % check_p).tolist(), dtype=np.int64), check):
        raise ArithmeticError("CRT reconstruction of tau failed its consistency check")
    return [0] + [int(v) for v in x]


def delta_series(nmax: int) -> QSeries:
    """The discriminant ``q prod (1 - q^n)^24`` to ``q^nmax``; level 1."""
    return QSeries.from_integers(delta_coefficients(nmax), level=1)


def euler_product(truncation: int) -> QSeries:
    """``prod_{n>=1} (1 - q^n)`` via the pentagonal number theorem."""
    vals = [0] * (truncation + 1)
    k = 0
    while True:
        hit = False
        for j in ((k * (3 * k - 1)) // 2, (k * (3 * k + 1)) // 2) if k else (0,):
            if j <= truncation:
                vals[j] = (-1) ** k
                hit = True
        if not hit:
            break
        k += 1
    return QSeries.from_integers(vals)

