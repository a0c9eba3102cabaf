"""Exact cyclotomic arithmetic and Dirichlet characters.

Rationals are :class:`fractions.Fraction`.  A :class:`CycValue` of order ``c``
stores its coordinates in the power basis ``1, z, ..., z^(phi(c)-1)`` of
``Q(z)``, ``z = exp(2 pi i / c)``, reduced modulo the ``c``-th cyclotomic
polynomial, so two values of the same order are equal iff their coordinate
tuples are.

Character labels
----------------
``(Z/M)^*`` is split by CRT into prime-power parts, ordered by increasing
prime.  An odd ``p^e`` part is cyclic and generated by the smallest positive
primitive root mod ``p^e``.  The 2-part is trivial for ``2 || M``, generated by
``-1`` for ``4 || M``, and is ``<-1> x <5>`` for ``8 | M`` (in that order).
Each generator is lifted to a residue mod ``M`` that is 1 on the other parts.
A character is the exponent vector ``(a_1, ..., a_r)`` with
``chi(g_i) = exp(2 pi i a_i / n_i)``, ``n_i`` the order of ``g_i``;
characters are enumerated in lexicographic order of that vector (last
component fastest), and the position in that order is the character index.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from typing import Iterable, Union

import numpy as np

from qmprime.ntheory import divisors, euler_phi, factorize, lcm, smallest_primitive_root

Rational = Fraction
Scalar = Union[int, Fraction]


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as a rational")


def rational_to_str(q) -> str:
    q = to_fraction(q)
    return f"{q.numerator}/{q.denominator}"


# --- cyclotomic tables ---------------------------------------------------------


def _polydivmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Divide integer polynomials (low degree first) by a monic ``den``."""
    num = list(num)
    dq = len(den) - 1
    if len(num) - 1 < dq:
        return [0], num
    quo = [0] * (len(num) - dq)
    for i in range(len(num) - 1, dq - 1, -1):
        c = num[i]
        if c:
            quo[i - dq] = c
            for j, d in enumerate(den):
                num[i - dq + j] -= c * d
    return quo, num[:dq] or [0]


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of the ``n``-th cyclotomic polynomial, constant term first."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in divisors(n):
        if d < n:
            poly, rem = _polydivmod(poly, list(cyclotomic_poly(d)))
            assert not any(rem)
    return tuple(poly)


@lru_cache(maxsize=None)
def _power_table(c: int) -> tuple[tuple[int, ...], ...]:
    """Row ``e`` holds the power-basis coordinates of ``z^e``, 0 <= e < c."""
    phi = euler_phi(c)
    poly = cyclotomic_poly(c)
    rows = []
    cur = [1] + [0] * (phi - 1)
    for _ in range(c):
        rows.append(tuple(cur))
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [x - top * p for x, p in zip(cur, poly[:phi])]
    return tuple(rows)


@lru_cache(maxsize=None)
def reduction_matrix(c: int) -> np.ndarray:
    """Integer matrix (object dtype) mapping group-ring coordinates to the power basis."""
    return np.array(_power_table(c), dtype=object).reshape(c, euler_phi(c))


def _solve_rational(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Exact least-structure solve of an overdetermined consistent system, or None."""
    n_unknown = len(rows[0]) if rows else 0
    aug = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for col in range(n_unknown):
        pivot = next((i for i in range(r, len(aug)) if aug[i][col] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv_cols.append(col)
        r += 1
    if any(row[-1] != 0 for row in aug[r:]):
        return None
    sol = [Fraction(0)] * n_unknown
    for i, col in enumerate(piv_cols):
        sol[col] = aug[i][-1]
    return sol


# --- CycValue --------------------------------------------------------------------


class CycValue:
    """An element of ``Q(zeta_c)`` in canonical power-basis form.  Immutable."""

    __slots__ = ("order", "_c", "_minimal")

    def __init__(self, order: int, coords: Iterable[Scalar]):
        coords = tuple(coords)
        if order < 1:
            raise ValueError("order must be positive")
        if len(coords) != euler_phi(order):
            raise ValueError(f"order {order} needs {euler_phi(order)} coordinates, got {len(coords)}")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "_c", coords)
        object.__setattr__(self, "_minimal", None)

    def __setattr__(self, name, value):
        raise AttributeError("CycValue is immutable")

    # constructors
    @classmethod
    def rational(cls, q: Scalar, order: int = 1) -> CycValue:
        return cls(order, (q,) + (0,) * (euler_phi(order) - 1))

    @classmethod
    def zero(cls, order: int = 1) -> CycValue:
        return cls(order, (0,) * euler_phi(order))

    @classmethod
    def one(cls, order: int = 1) -> CycValue:
        return cls.rational(1, order)

    @classmethod
    def root_of_unity(cls, c: int, e: int = 1) -> CycValue:
        return cls(c, _power_table(c)[e % c])

    @classmethod
    def from_dict(cls, order: int, coeffs: dict) -> CycValue:
        """Build from ``{exponent: rational}``; exponents may exceed ``phi(order)``."""
        acc = [0] * euler_phi(order)
        table = _power_table(order)
        for e, q in coeffs.items():
            q = to_fraction(q)
            if q:
                for i, t in enumerate(table[int(e) % order]):
                    if t:
                        acc[i] += t * q
        return cls(order, acc)

    @classmethod
    def coerce(cls, x) -> CycValue:
        if isinstance(x, CycValue):
            return x
        return cls.rational(to_fraction(x))

    # views
    @property
    def coords(self) -> tuple:
        return self._c

    @property
    def coeffs(self) -> dict[int, Fraction]:
        return {e: to_fraction(q) for e, q in enumerate(self._c) if q}

    def is_zero(self) -> bool:
        return not any(self._c)

    def __bool__(self) -> bool:
        return any(self._c)

    def is_rational(self) -> bool:
        return not any(self._c[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return to_fraction(self._c[0])

    def is_real(self) -> bool:
        return self == self.conj()

    def to_complex(self) -> complex:
        z = cmath.exp(2j * math.pi / self.order)
        return sum((complex(float(q)) * z**e for e, q in enumerate(self._c) if q), 0j)

    # order handling
    def embed(self, order: int) -> CycValue:
        """Re-express in ``Q(zeta_order)``; ``self.order`` must divide ``order``."""
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError(f"cannot embed order {self.order} into {order}")
        step = order // self.order
        table = _power_table(order)
        acc = [0] * euler_phi(order)
        for e, q in enumerate(self._c):
            if q:
                for i, t in enumerate(table[e * step]):
                    if t:
                        acc[i] += t * q
        return CycValue(order, acc)

    def minimal(self) -> CycValue:
        """The same value expressed in the smallest cyclotomic field containing it."""
        if self._minimal is not None:
            return self._minimal
        result = self
        if self.is_rational():
            result = CycValue.rational(self._c[0])
        else:
            table = _power_table(self.order)
            for d in divisors(self.order):
                if d == self.order:
                    break
                step = self.order // d
                cols = [table[i * step] for i in range(euler_phi(d))]
                rows = [[col[r] for col in cols] for r in range(len(self._c))]
                sol = _solve_rational(rows, [to_fraction(q) for q in self._c])
                if sol is not None:
                    result = CycValue(d, [q.numerator if q.denominator == 1 else q for q in sol])
                    break
        object.__setattr__(self, "_minimal", result)
        return result

    @staticmethod
    def unify(a: CycValue, b: CycValue) -> tuple[CycValue, CycValue]:
        if a.order == b.order:
            return a, b
        L = lcm(a.order, b.order)
        return a.embed(L), b.embed(L)

    # arithmetic
    def __add__(self, other) -> CycValue:
        if not isinstance(other, CycValue):
            other = to_fraction(other) if not isinstance(other, int) else other
            return CycValue(self.order, (self._c[0] + other,) + self._c[1:])
        a, b = CycValue.unify(self, other)
        return CycValue(a.order, [x + y for x, y in zip(a._c, b._c)])

    __radd__ = __add__

    def __neg__(self) -> CycValue:
        return CycValue(self.order, [-x for x in self._c])

    def __sub__(self, other) -> CycValue:
        return self + (-other)

    def __rsub__(self, other) -> CycValue:
        return (-self) + other

    def __mul__(self, other) -> CycValue:
        if not isinstance(other, CycValue):
            if isinstance(other, (int, Fraction, np.integer)):
                return CycValue(self.order, [x * other for x in self._c])
            return NotImplemented
        a, b = CycValue.unify(self, other)
        if a.order <= 2:
            return CycValue(a.order, (a._c[0] * b._c[0],))
        n = len(a._c)
        conv = [0] * (2 * n - 1)
        for i, x in enumerate(a._c):
            if x:
                for j, y in enumerate(b._c):
                    if y:
                        conv[i + j] += x * y
        table = _power_table(a.order)
        acc = list(conv[:n])
        for t in range(n, 2 * n - 1):
            if conv[t]:
                for i, r in enumerate(table[t % a.order]):
                    if r:
                        acc[i] += r * conv[t]
        return CycValue(a.order, acc)

    __rmul__ = __mul__

    def __truediv__(self, other) -> CycValue:
        if isinstance(other, CycValue):
            if not other.is_rational():
                return self * other.inverse()
            other = other.to_rational()
        return CycValue(self.order, [Fraction(x) / other for x in self._c])

    def inverse(self) -> CycValue:
        """Multiplicative inverse via the norm-free linear solve ``self * x = 1``."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.is_rational():
            return CycValue.rational(1 / to_fraction(self._c[0]), self.order)
        n = len(self._c)
        basis = [CycValue(self.order, [int(i == j) for j in range(n)]) for i in range(n)]
        cols = [(self * b)._c for b in basis]
        rows = [[col[r] for col in cols] for r in range(n)]
        sol = _solve_rational(rows, [1] + [0] * (n - 1))
        return CycValue(self.order, sol)

    def __pow__(self, k: int) -> CycValue:
        if k < 0:
            return self.inverse() ** (-k)
        out = CycValue.one(self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> CycValue:
        """Complex conjugate: every root of unity ``z`` goes to ``z^-1``."""
        if self.order <= 2:
            return self
        table = _power_table(self.order)
        acc = [0] * len(self._c)
        for e, q in enumerate(self._c):
            if q:
                for i, t in enumerate(table[(-e) % self.order]):
                    if t:
                        acc[i] += t * q
        return CycValue(self.order, acc)

    # comparison
    def __eq__(self, other) -> bool:
        if isinstance(other, CycValue):
            a, b = CycValue.unify(self, other)
            return a._c == b._c
        if isinstance(other, (int, Fraction, np.integer)):
            return self.is_rational() and self._c[0] == other
        return NotImplemented

    def __hash__(self) -> int:
        m = self.minimal()
        if m.order <= 2:
            return hash(m._c[0])
        return hash((m.order, m._c))

    def sign(self) -> int:
        """Sign of a rational value."""
        q = self.to_rational()
        return (q > 0) - (q < 0)

    # text / JSON
    def __repr__(self) -> str:
        return f"CycValue({self.order}, {self.coeffs})"

    def __str__(self) -> str:
        parts = []
        for e, q in enumerate(self._c):
            if not q:
                continue
            q = to_fraction(q)
            if e == 0:
                parts.append(str(q))
            else:
                mono = f"zeta{self.order}" + (f"^{e}" if e > 1 else "")
                parts.append(mono if q == 1 else f"-{mono}" if q == -1 else f"{q}*{mono}")
        if not parts:
            return "0"
        text = parts[0]
        for p in parts[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return text

    def to_json(self) -> dict:
        return {"order": self.order, "coeffs": {str(e): rational_to_str(q) for e, q in self.coeffs.items()}}

    @classmethod
    def from_json(cls, obj) -> CycValue:
        if isinstance(obj, (str, int)):
            return cls.rational(to_fraction(obj))
        order = int(obj["order"])
        phi = euler_phi(order)
        coords: list = [0] * phi
        for e, q in obj.get("coeffs", {}).items():
            e = int(e)
            if not 0 <= e < phi:
                raise ValueError(f"exponent {e} outside the power basis of order {order}")
            coords[e] = to_fraction(q)
        return cls(order, [q.numerator if isinstance(q, Fraction) and q.denominator == 1 else q for q in coords])


def cyc_add(a: CycValue, b: CycValue) -> CycValue:
    return CycValue.coerce(a) + CycValue.coerce(b)


def cyc_mul(a: CycValue, b: CycValue) -> CycValue:
    return CycValue.coerce(a) * CycValue.coerce(b)


def cyc_conj(a: CycValue) -> CycValue:
    return CycValue.coerce(a).conj()


# --- unit groups -----------------------------------------------------------------


@dataclass(frozen=True)
class UnitGroup:
    """CRT decomposition of ``(Z/M)^*`` into cyclic factors with fixed generators."""

    modulus: int
    generators: tuple[int, ...]
    orders: tuple[int, ...]
    prime_of: tuple[int, ...]
    exponent: int
    logs: dict = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return math.prod(self.orders)


@lru_cache(maxsize=256)
def unit_group(M: int) -> UnitGroup:
    if M < 1:
        raise ValueError("modulus must be positive")
    gens: list[int] = []
    orders: list[int] = []
    primes: list[int] = []
    for p, e in factorize(M):
        q = p**e
        rest = M // q

        def lift(g: int) -> int:
            if rest == 1:
                return g % M
            # x ≡ g (mod q), x ≡ 1 (mod rest)
            return (g + q * ((1 - g) * pow(q, -1, rest) % rest)) % M

        if p == 2:
            if e == 2:
                gens.append(lift(-1))
                orders.append(2)
                primes.append(2)
            elif e >= 3:
                gens += [lift(-1), lift(5)]
                orders += [2, 2 ** (e - 2)]
                primes += [2, 2]
        else:
            gens.append(lift(smallest_primitive_root(q)))
            orders.append(euler_phi(q))
            primes.append(p)
    logs: dict[int, tuple[int, ...]] = {}
    for vec in product(*(range(n) for n in orders)):
        x = 1
        for g, a in zip(gens, vec):
            x = x * pow(g, a, M) % M
        logs[x % M] = vec
    if M == 1:
        logs = {0: ()}
    return UnitGroup(M, tuple(gens), tuple(orders), tuple(primes), lcm(*orders) if orders else 1, logs)


# --- Dirichlet characters ------------------------------------------------------------


@dataclass(frozen=True)
class DirichletCharacter:
    """A Dirichlet character mod ``modulus`` given by its exponent vector."""

    modulus: int
    exponents: tuple[int, ...]

    def __post_init__(self):
        grp = unit_group(self.modulus)
        if len(self.exponents) != len(grp.orders):
            raise ValueError(f"modulus {self.modulus} needs {len(grp.orders)} exponents")
        object.__setattr__(self, "exponents", tuple(a % n for a, n in zip(self.exponents, grp.orders)))

    @property
    def group(self) -> UnitGroup:
        return unit_group(self.modulus)

    @cached_property
    def index(self) -> int:
        idx = 0
        for a, n in zip(self.exponents, self.group.orders):
            idx = idx * n + a
        return idx

    @classmethod
    def from_index(cls, modulus: int, index: int) -> DirichletCharacter:
        orders = unit_group(modulus).orders
        total = math.prod(orders)
        if not 0 <= index < total:
            raise ValueError(f"character index {index} out of range for modulus {modulus} ({total} characters)")
        vec = []
        for n in reversed(orders):
            vec.append(index % n)
            index //= n
        return cls(modulus, tuple(reversed(vec)))

    @classmethod
    def principal(cls, modulus: int = 1) -> DirichletCharacter:
        return cls(modulus, (0,) * len(unit_group(modulus).orders))

    @cached_property
    def order(self) -> int:
        return lcm(*(n // math.gcd(a, n) for a, n in zip(self.exponents, self.group.orders)))

    def angle(self, n: int) -> Fraction | None:
        """``t`` in [0, 1) with ``chi(n) = exp(2 pi i t)``, or None when ``gcd(n, M) > 1``."""
        vec = self.group.logs.get(n % self.modulus)
        if vec is None:
            return None
        t = sum((Fraction(a * l, k) for a, l, k in zip(self.exponents, vec, self.group.orders)), Fraction(0))
        return t - math.floor(t)

    @cached_property
    def exponent_table(self) -> np.ndarray:
        """``table[r]`` is ``e`` with ``chi(r) = zeta_order^e``, or -1 off the units."""
        table = np.full(self.modulus, -1, dtype=np.int64)
        for r in self.group.logs:
            t = self.angle(r)
            table[r] = int(t * self.order)
        return table

    def __call__(self, n: int) -> CycValue:
        return character_value(self, n)

    @cached_property
    def is_principal(self) -> bool:
        return not any(self.exponents)

    @cached_property
    def parity(self) -> int:
        """``chi(-1)`` as +1 or -1."""
        return 1 if self.angle(-1) == 0 else -1

    @cached_property
    def conductor(self) -> int:
        f = 1
        grp = self.group
        for a, n, p in zip(self.exponents, grp.orders, grp.prime_of):
            o = n // math.gcd(a, n)
            if p == 2 or o == 1:
                continue
            # trivial on 1 + p^c Z iff the local order divides phi(p^c)
            c = 1
            while (p - 1) * p ** (c - 1) % o:
                c += 1
            f *= p**c
        return f * self._two_part_conductor()

    def _two_part_conductor(self) -> int:
        grp = self.group
        slots = [(a, n) for a, n, p in zip(self.exponents, grp.orders, grp.prime_of) if p == 2]
        if not slots:
            return 1
        if len(slots) == 1:  # 4 || M: only the -1 factor
            return 4 if slots[0][0] else 1
        (a_minus, _), (a_five, n_five) = slots
        o5 = n_five // math.gcd(a_five, n_five)
        if o5 > 1:
            return 2 ** (2 + o5.bit_length() - 1)
        return 4 if a_minus else 1

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def conjugate(self) -> DirichletCharacter:
        return DirichletCharacter(self.modulus, tuple(-a for a in self.exponents))

    def induce(self, modulus: int) -> DirichletCharacter:
        """The character mod a multiple of ``self.modulus`` with the same values on units."""
        if modulus % self.modulus:
            raise ValueError(f"{modulus} is not a multiple of {self.modulus}")
        return _from_angles(modulus, self.angle)

    def primitive(self) -> DirichletCharacter:
        """The primitive character mod the conductor that induces ``self``."""
        f = self.conductor

        def ang(r: int) -> Fraction | None:
            if math.gcd(r, f) != 1:
                return None
            n = r % f if f > 1 else 1
            while math.gcd(n, self.modulus) != 1:
                n += f
            return self.angle(n)

        return _from_angles(f, ang)

    def __mul__(self, other: DirichletCharacter) -> DirichletCharacter:
        L = lcm(self.modulus, other.modulus)

        def ang(r: int) -> Fraction | None:
            a, b = self.angle(r), other.angle(r)
            if a is None or b is None:
                return None
            t = a + b
            return t - math.floor(t)

        return _from_angles(L, ang)

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "index": self.index}

    @classmethod
    def from_json(cls, obj) -> DirichletCharacter:
        return cls.from_index(int(obj["modulus"]), int(obj["index"]))

    def label(self) -> str:
        return f"{self.modulus}:{self.index}"

    @classmethod
    def from_label(cls, text: str, modulus: int | None = None) -> DirichletCharacter:
        """Parse ``"M:j"`` or a bare index ``"j"`` (then ``modulus`` is required)."""
        text = text.strip()
        if ":" in text:
            m, j = text.split(":", 1)
            return cls.from_index(int(m), int(j))
        if modulus is None:
            raise ValueError(f"character label {text!r} needs a modulus (use M:index)")
        return cls.from_index(modulus, int(text))


def _from_angles(modulus: int, angle_of) -> DirichletCharacter:
    grp = unit_group(modulus)
    vec = []
    for g, n in zip(grp.generators, grp.orders):
        t = angle_of(g)
        if t is None:
            raise ValueError(f"generator {g} mod {modulus} is not a unit for the source character")
        a = t * n
        if a.denominator != 1:
            raise ValueError("angles are inconsistent with a character of this modulus")
        vec.append(int(a))
    return DirichletCharacter(modulus, tuple(vec))


def enumerate_characters(M: int) -> list[DirichletCharacter]:
    """All ``phi(M)`` characters mod ``M`` in index order (index 0 is principal)."""
    grp = unit_group(M)
    return [DirichletCharacter(M, vec) for vec in product(*(range(n) for n in grp.orders))]


def character_value(chi: DirichletCharacter, n: int) -> CycValue:
    """``chi(n)`` as a CycValue of order ``chi.order`` (zero off the units)."""
    e = int(chi.exponent_table[n % chi.modulus])
    if e < 0:
        return CycValue.zero(chi.order)
    return CycValue.root_of_unity(chi.order, e)


# --- Kronecker symbol -----------------------------------------------------------------


def jacobi(a: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise ValueError("Jacobi symbol needs an odd positive modulus")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(D: int, n: int) -> int:
    """The Kronecker symbol ``(D / n)``."""
    if n == 0:
        return 1 if D in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if D < 0:
            result = -result
    v = (n & -n).bit_length() - 1
    if v:
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5) and v % 2:
            result = -result
        n >>= v
    if n == 1:
        return result
    return result * jacobi(D, n)


def kronecker_character(D: int) -> DirichletCharacter:
    """``n -> (D/n)`` as a character mod ``|D|`` (``D ≡ 0, 1 mod 4``) or ``4|D|`` otherwise."""
    if D == 0:
        raise ValueError("D must be nonzero")
    M = abs(D) if D % 4 in (0, 1) else 4 * abs(D)

    def ang(r: int) -> Fraction | None:
        s = kronecker(D, r)
        if s == 0:
            return None
        return Fraction(0) if s == 1 else Fraction(1, 2)

    return _from_angles(M, ang)
