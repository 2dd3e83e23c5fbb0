"""Exact scalars: rationals, elements of Q(zeta_M), pi-tagged scalars and polynomials in X.

Every coefficient the library produces is one of these. Values are immutable;
arithmetic always returns new objects.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

import mpmath
from sympy import QQ, Matrix, Poly, Rational, cyclotomic_poly, divisors, mobius, multiplicity, symbols, totient

from .errors import ArithmeticDomainError

logger = logging.getLogger(__name__)

_x = symbols("x")

Number = Union[int, Fraction, "CyclotomicNumber"]


def to_fraction(value) -> Fraction:
    """int, Fraction or sympy Rational -> Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if hasattr(value, "p") and hasattr(value, "q"):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot read {value!r} as a rational")


@lru_cache(maxsize=None)
def euler_phi(modulus: int) -> int:
    return int(totient(modulus))


@lru_cache(maxsize=None)
def cyclotomic_coefficients(modulus: int) -> tuple[int, ...]:
    """Coefficients of the modulus-th cyclotomic polynomial, constant term first."""
    poly = Poly(cyclotomic_poly(modulus, _x), _x)
    return tuple(int(c) for c in reversed(poly.all_coeffs()))


def _reduce(coeffs: list, modulus: int) -> tuple[Fraction, ...]:
    phi = cyclotomic_coefficients(modulus)
    deg = len(phi) - 1
    c = list(coeffs) + [0] * max(0, deg - len(coeffs))
    for top in range(len(c) - 1, deg - 1, -1):
        lead = c[top]
        if lead:
            shift = top - deg
            for i in range(deg):
                if phi[i]:
                    c[shift + i] -= lead * phi[i]
            c[top] = 0
    return tuple(Fraction(v) for v in c[:deg])


@lru_cache(maxsize=None)
def _power_table(modulus: int) -> tuple[tuple[Fraction, ...], ...]:
    """Coordinates of zeta_M^j for j = 0..M-1."""
    return tuple(_reduce([0] * j + [1], modulus) for j in range(modulus))


@lru_cache(maxsize=None)
def _trace_weights(modulus: int) -> tuple[Fraction, ...]:
    # normalized trace of zeta_M^j: Ramanujan sum c_M(j) / phi(M)
    out = []
    for j in range(euler_phi(modulus)):
        q = modulus // math.gcd(j, modulus)
        out.append(Fraction(int(mobius(q)), euler_phi(q)))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class CyclotomicNumber:
    """Element of Q(zeta_M) in the power basis 1, zeta_M, ..., zeta_M^(phi(M)-1)."""

    modulus: int
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if self.modulus < 1:
            raise ArithmeticDomainError(f"cyclotomic modulus must be positive, got {self.modulus}")
        if len(self.coords) != euler_phi(self.modulus):
            raise ArithmeticDomainError(
                f"expected {euler_phi(self.modulus)} coordinates for modulus {self.modulus}, got {len(self.coords)}"
            )

    # ---------- constructors ----------

    @classmethod
    def rational(cls, value, modulus: int = 1) -> "CyclotomicNumber":
        q = to_fraction(value)
        return cls(modulus, (q,) + (Fraction(0),) * (euler_phi(modulus) - 1))

    @classmethod
    def zeta(cls, modulus: int, power: int = 1) -> "CyclotomicNumber":
        return cls(modulus, _power_table(modulus)[power % modulus])

    @classmethod
    def from_powers(cls, modulus: int, terms: Mapping[int, Union[int, Fraction]]) -> "CyclotomicNumber":
        """sum of terms[j] * zeta_M^j."""
        table = _power_table(modulus)
        acc = [Fraction(0)] * euler_phi(modulus)
        for j, c in terms.items():
            if not c:
                continue
            for i, t in enumerate(table[j % modulus]):
                if t:
                    acc[i] += c * t
        return cls(modulus, tuple(acc))

    # ---------- predicates ----------

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ArithmeticDomainError(f"{self} is not rational")
        return self.coords[0]

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    # ---------- field plumbing ----------

    def embed(self, modulus: int) -> "CyclotomicNumber":
        return cyclo_embed(self, modulus)

    def galois(self, a: int) -> "CyclotomicNumber":
        """Image under zeta_M -> zeta_M^a."""
        if math.gcd(a, self.modulus) != 1:
            raise ArithmeticDomainError(f"{a} is not a unit modulo {self.modulus}")
        return CyclotomicNumber.from_powers(self.modulus, {j * a: c for j, c in enumerate(self.coords)})

    def conj(self) -> "CyclotomicNumber":
        if self.is_rational():
            return self
        return self.galois(-1)

    def minimize(self) -> "CyclotomicNumber":
        """The same element over the smallest cyclotomic field containing it."""
        if self.is_rational():
            return CyclotomicNumber.rational(self.coords[0])
        target = Matrix([Rational(c.numerator, c.denominator) for c in self.coords])
        for d in divisors(self.modulus):
            if d == self.modulus:
                break
            if d % 4 == 2:
                continue  # Q(zeta_d) = Q(zeta_{d/2})
            step = self.modulus // d
            columns = [CyclotomicNumber.zeta(self.modulus, j * step).coords for j in range(euler_phi(d))]
            basis = Matrix([[Rational(col[i].numerator, col[i].denominator) for col in columns]
                            for i in range(len(self.coords))])
            try:
                solution, _ = basis.gauss_jordan_solve(target)
            except ValueError:
                continue
            return CyclotomicNumber(d, tuple(to_fraction(v) for v in solution))
        return self

    # ---------- arithmetic ----------

    @staticmethod
    def _coerce(value) -> "CyclotomicNumber":
        if isinstance(value, CyclotomicNumber):
            return value
        return CyclotomicNumber.rational(value)

    def _common(self, other) -> tuple["CyclotomicNumber", "CyclotomicNumber"]:
        other = self._coerce(other)
        if other.modulus == self.modulus:
            return self, other
        m = math.lcm(self.modulus, other.modulus)
        return self.embed(m), other.embed(m)

    def __add__(self, other):
        if not isinstance(other, (int, Fraction, CyclotomicNumber)):
            return NotImplemented
        a, b = self._common(other)
        return CyclotomicNumber(a.modulus, tuple(x + y for x, y in zip(a.coords, b.coords)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.modulus, tuple(-c for c in self.coords))

    def __sub__(self, other):
        if not isinstance(other, (int, Fraction, CyclotomicNumber)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber(self.modulus, tuple(c * other for c in self.coords))
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        if other.is_rational():
            return self * other.coords[0]
        if self.is_rational():
            return other * self.coords[0]
        a, b = self._common(other)
        conv = [Fraction(0)] * (2 * len(a.coords) - 1)
        for i, x in enumerate(a.coords):
            if x:
                for j, y in enumerate(b.coords):
                    if y:
                        conv[i + j] += x * y
        return CyclotomicNumber(a.modulus, _reduce(conv, a.modulus))

    __rmul__ = __mul__

    def inverse(self) -> "CyclotomicNumber":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        if self.is_rational():
            return CyclotomicNumber.rational(1 / self.coords[0], self.modulus)
        num = Poly([Rational(c.numerator, c.denominator) for c in reversed(self.coords)], _x, domain=QQ)
        phi = Poly(cyclotomic_poly(self.modulus, _x), _x, domain=QQ)
        inv = num.invert(phi)
        coeffs = [to_fraction(c) for c in reversed(inv.all_coeffs())]
        return CyclotomicNumber(self.modulus, _reduce(coeffs, self.modulus))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / Fraction(other))
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = CyclotomicNumber.rational(1, self.modulus)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, (int, Fraction, CyclotomicNumber)):
            return NotImplemented
        a, b = self._common(other)
        return a.coords == b.coords

    def __hash__(self):
        # normalized trace is invariant under embedding, so equal elements hash alike
        weights = _trace_weights(self.modulus)
        return hash(sum((c * w for c, w in zip(self.coords, weights)), Fraction(0)))

    # ---------- numerics ----------

    def to_complex(self) -> mpmath.mpc:
        total = mpmath.mpc(0)
        for j, c in enumerate(self.coords):
            if c:
                total += (mpmath.mpf(c.numerator) / c.denominator) * mpmath.expjpi(mpmath.mpf(2 * j) / self.modulus)
        return total

    def __repr__(self):
        if self.is_rational():
            return f"CyclotomicNumber({self.coords[0]})"
        terms = [f"{c}*z{self.modulus}^{j}" for j, c in enumerate(self.coords) if c]
        return "CyclotomicNumber(" + " + ".join(terms) + ")"


def cyclo_embed(x: CyclotomicNumber, modulus: int) -> CyclotomicNumber:
    """Image of x in Q(zeta_modulus); the current modulus must divide the new one."""
    if modulus % x.modulus:
        raise ArithmeticDomainError(
            f"incompatible cyclotomic moduli: {x.modulus} does not divide {modulus}"
        )
    if modulus == x.modulus:
        return x
    if x.is_rational():
        return CyclotomicNumber.rational(x.coords[0], modulus)
    step = modulus // x.modulus
    return CyclotomicNumber.from_powers(modulus, {j * step: c for j, c in enumerate(x.coords)})


def rational_valuation(q, p: int) -> Union[int, float]:
    q = to_fraction(q)
    if q == 0:
        return math.inf
    return int(multiplicity(p, abs(q.numerator))) - int(multiplicity(p, q.denominator))


def p_valuation(x: Number, p: int) -> Union[int, float]:
    """min over power-basis coordinates of v_p; math.inf for zero.

    x lies in the local ring of integers at p iff the result is >= 0. Only
    defined when p is unramified in the field of x.
    """
    if not isinstance(x, CyclotomicNumber):
        return rational_valuation(x, p)
    if x.is_zero():
        return math.inf
    if x.modulus % p == 0:
        x = x.minimize()
        if x.modulus % p == 0:
            raise ArithmeticDomainError(
                f"ramified modulus unsupported: p={p} divides cyclotomic modulus {x.modulus}"
            )
    return min(rational_valuation(c, p) for c in x.coords if c)


def unit(modulus: int = 1) -> CyclotomicNumber:
    return CyclotomicNumber.rational(1, modulus)


# ---------- pi-tagged scalars ----------


@dataclass(frozen=True)
class PiScalar:
    """value * pi**pi_exponent with value algebraic."""

    value: CyclotomicNumber
    pi_exponent: int = 0

    @classmethod
    def of(cls, value, pi_exponent: int = 0) -> "PiScalar":
        return cls(CyclotomicNumber._coerce(value), pi_exponent)

    def __mul__(self, other):
        if isinstance(other, PiScalar):
            return PiScalar(self.value * other.value, self.pi_exponent + other.pi_exponent)
        if isinstance(other, (int, Fraction, CyclotomicNumber)):
            return PiScalar(self.value * other, self.pi_exponent)
        return NotImplemented

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, PiScalar):
            return NotImplemented
        if other.value.is_zero():
            return self
        if self.value.is_zero():
            return other
        if other.pi_exponent != self.pi_exponent:
            raise ArithmeticDomainError(
                f"cannot add pi^{self.pi_exponent} and pi^{other.pi_exponent} terms"
            )
        return PiScalar(self.value + other.value, self.pi_exponent)

    def __neg__(self):
        return PiScalar(-self.value, self.pi_exponent)

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return self.value.is_zero()

    def to_complex(self) -> mpmath.mpc:
        return self.value.to_complex() * mpmath.pi ** self.pi_exponent


# ---------- polynomials in X ----------


@dataclass(frozen=True, eq=False)
class UniPoly:
    """Polynomial in X with cyclotomic coefficients; coefficients[i] multiplies X^i."""

    coefficients: tuple[CyclotomicNumber, ...]

    def __post_init__(self):
        coeffs = [CyclotomicNumber._coerce(c) for c in self.coefficients]
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def of(cls, values: Iterable) -> "UniPoly":
        return cls(tuple(values))

    @classmethod
    def one(cls) -> "UniPoly":
        return cls((unit(),))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def coefficient(self, i: int) -> CyclotomicNumber:
        if 0 <= i < len(self.coefficients):
            return self.coefficients[i]
        return CyclotomicNumber.rational(0)

    def is_integral(self) -> bool:
        """All coefficients are rational integers."""
        return all(c.is_rational() and c.coords[0].denominator == 1 for c in self.coefficients)

    def __add__(self, other: "UniPoly") -> "UniPoly":
        n = max(len(self.coefficients), len(other.coefficients))
        return UniPoly(tuple(self.coefficient(i) + other.coefficient(i) for i in range(n)))

    def __neg__(self) -> "UniPoly":
        return UniPoly(tuple(-c for c in self.coefficients))

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CyclotomicNumber)):
            return UniPoly(tuple(c * other for c in self.coefficients))
        if not isinstance(other, UniPoly):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return UniPoly(())
        out = [CyclotomicNumber.rational(0)] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coefficients):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return UniPoly(tuple(out))

    __rmul__ = __mul__

    def __call__(self, x) -> CyclotomicNumber:
        acc = CyclotomicNumber.rational(0)
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        if not isinstance(other, UniPoly):
            return NotImplemented
        n = max(len(self.coefficients), len(other.coefficients))
        return all(self.coefficient(i) == other.coefficient(i) for i in range(n))

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        if self.is_zero():
            return "UniPoly(0)"
        terms = []
        for i, c in enumerate(self.coefficients):
            if c.is_zero():
                continue
            shown = c.coords[0] if c.is_rational() else c
            terms.append(f"{shown}" if i == 0 else f"{shown}*X^{i}")
        return "UniPoly(" + " + ".join(terms) + ")"


def poly_div_exact(num: UniPoly, den: UniPoly) -> UniPoly:
    """q with num == q * den; a nonzero remainder raises."""
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    rem = list(num.coefficients)
    lead_inv = den.coefficients[-1].inverse()
    dd = den.degree
    quot = [CyclotomicNumber.rational(0)] * max(0, len(rem) - dd)
    for top in range(len(rem) - 1, dd - 1, -1):
        c = rem[top]
        if c.is_zero():
            continue
        q = c * lead_inv
        quot[top - dd] = q
        for i, d in enumerate(den.coefficients):
            rem[top - dd + i] = rem[top - dd + i] - q * d
    if any(not r.is_zero() for r in rem[:dd]):
        raise ArithmeticDomainError(f"inexact division: {num} by {den}")
    return UniPoly(tuple(quot))


# ---------- JSON codec ----------


def cyclo_to_json(x: Number) -> dict:
    x = CyclotomicNumber._coerce(x)
    return {"modulus": x.modulus, "coords": [str(c) for c in x.coords]}


def cyclo_from_json(data: dict) -> CyclotomicNumber:
    return CyclotomicNumber(int(data["modulus"]), tuple(Fraction(c) for c in data["coords"]))


def pi_scalar_to_json(x: PiScalar) -> dict:
    return {"value": cyclo_to_json(x.value), "pi_exp": x.pi_exponent}


def pi_scalar_from_json(data: dict) -> PiScalar:
    return PiScalar(cyclo_from_json(data["value"]), int(data["pi_exp"]))
