"""Dirichlet characters, Gauss sums, generalized Bernoulli numbers and the L-value bracket.

A character modulo m is stored by its "logs" on a fixed generating set of
(Z/m)^x: chi(g_i) = exp(2*pi*i*angle_i), angle_i in Q/Z. Generators are one
primitive root per odd prime power and (-1, 5) for 2^e with e >= 3, each
lifted by CRT to be 1 at the other prime powers.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Iterator

import mpmath
from sympy import Poly, Rational, bernoulli, divisors, factorint, jacobi_symbol, multiplicity, primitive_root, symbols
from sympy.ntheory.modular import crt

from .errors import InternalInvariantError, PreconditionError
from .exactnum import CyclotomicNumber, PiScalar, to_fraction

logger = logging.getLogger(__name__)

_t = symbols("t")


def crt_lift(residue: int, q: int, other: int) -> int:
    """x mod q*other with x = residue mod q and x = 1 mod other."""
    if other == 1:
        return residue % q
    if q == 1:
        return 1 % other
    return int(crt([q, other], [residue % q, 1])[0])


@lru_cache(maxsize=None)
def unit_group_generators(modulus: int) -> tuple[tuple[int, int], ...]:
    """(generator, order) pairs generating (Z/modulus)^x, primes ascending."""
    gens = []
    for p, e in sorted(factorint(modulus).items()):
        q = p**e
        other = modulus // q
        if p == 2:
            if e == 1:
                continue
            local = [(q - 1, 2)] if e == 2 else [(q - 1, 2), (5, 2 ** (e - 2))]
        else:
            local = [(int(primitive_root(q)), q // p * (p - 1))]
        gens.extend((crt_lift(g, q, other), order) for g, order in local)
    return tuple(gens)


def _root_angle(value: CyclotomicNumber) -> Fraction:
    m = 2 * value.modulus
    for j in range(m):
        if value == CyclotomicNumber.zeta(m, j):
            return Fraction(j, m)
    raise PreconditionError(f"character image {value} is not a root of unity")


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    angles: tuple[Fraction, ...]

    def __post_init__(self):
        gens = unit_group_generators(self.modulus)
        if len(self.angles) != len(gens):
            raise PreconditionError(
                f"modulus {self.modulus} has {len(gens)} generators, got {len(self.angles)} images"
            )
        normalized = []
        for angle, (g, order) in zip(self.angles, gens):
            angle = to_fraction(angle) % 1
            if (angle * order).denominator != 1:
                raise PreconditionError(
                    f"inconsistent image order: chi({g}) must be an {order}-th root of unity"
                )
            normalized.append(angle)
        object.__setattr__(self, "angles", tuple(normalized))

    # ---------- constructors ----------

    @classmethod
    def trivial(cls, modulus: int = 1) -> "DirichletCharacter":
        return cls(modulus, tuple(Fraction(0) for _ in unit_group_generators(modulus)))

    @classmethod
    def from_function(cls, modulus: int, angle_at: Callable[[int], Fraction]) -> "DirichletCharacter":
        """Character whose angle at each generator g is angle_at(g)."""
        return cls(modulus, tuple(angle_at(g) for g, _ in unit_group_generators(modulus)))

    # ---------- evaluation ----------

    @cached_property
    def table(self) -> dict[int, Fraction]:
        """residue -> angle on all units; filled once, idempotently."""
        table = {1 % self.modulus: Fraction(0)}
        for angle, (g, order) in zip(self.angles, unit_group_generators(self.modulus)):
            grown = {}
            for r, a in table.items():
                x = r
                for t in range(order):
                    grown[x] = (a + t * angle) % 1
                    x = x * g % self.modulus
            table = grown
        return table

    @cached_property
    def order(self) -> int:
        return math.lcm(1, *(a.denominator for a in self.angles))

    def angle(self, a: int) -> Fraction | None:
        return self.table.get(a % self.modulus)

    def __call__(self, a: int) -> CyclotomicNumber:
        angle = self.angle(a)
        if angle is None:
            return CyclotomicNumber.rational(0)
        return CyclotomicNumber.zeta(self.order, int(angle * self.order))

    @property
    def parity(self) -> int:
        """epsilon with chi(-1) = (-1)^epsilon."""
        return 0 if self.angle(-1) == 0 else 1

    def is_trivial(self) -> bool:
        return not any(self.angles)

    def is_primitive(self) -> bool:
        return conductor_and_primitive(self)[0] == self.modulus

    def is_quadratic(self) -> bool:
        return all(a in (0, Fraction(1, 2)) for a in self.angles)

    # ---------- group law ----------

    def lift(self, modulus: int) -> "DirichletCharacter":
        """The character modulo a multiple of the modulus induced by this one."""
        if modulus % self.modulus:
            raise PreconditionError(f"cannot lift a character mod {self.modulus} to mod {modulus}")
        if modulus == self.modulus:
            return self
        return DirichletCharacter.from_function(modulus, lambda g: self.angle(g))

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple(-a for a in self.angles))

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        m = math.lcm(self.modulus, other.modulus)
        a, b = self.lift(m), other.lift(m)
        return DirichletCharacter(m, tuple(x + y for x, y in zip(a.angles, b.angles)))

    def __pow__(self, exponent: int) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple(a * exponent for a in self.angles))

    def agrees_with(self, other: "DirichletCharacter") -> bool:
        """Same values on integers coprime to both moduli."""
        m = math.lcm(self.modulus, other.modulus)
        return self.lift(m) == other.lift(m)


def all_characters(modulus: int) -> Iterator[DirichletCharacter]:
    """Every character modulo modulus, in lexicographic order of generator logs."""
    gens = unit_group_generators(modulus)
    for logs in itertools.product(*(range(order) for _, order in gens)):
        yield DirichletCharacter(modulus, tuple(Fraction(t, order) for t, (_, order) in zip(logs, gens)))


def make_character(modulus: int, generator_images: Iterable[CyclotomicNumber]) -> DirichletCharacter:
    """Character from its values (roots of unity) on unit_group_generators(modulus)."""
    return DirichletCharacter(modulus, tuple(_root_angle(CyclotomicNumber._coerce(v)) for v in generator_images))


def _unit_lift(a: int, d: int, modulus: int) -> int:
    x = a % d if d > 1 else 1
    while math.gcd(x, modulus) != 1:
        x += d
    return x


@lru_cache(maxsize=4096)
def conductor_and_primitive(chi: DirichletCharacter) -> tuple[int, DirichletCharacter]:
    for d in divisors(chi.modulus):
        if all(angle == 0 for a, angle in chi.table.items() if a % d == 1 % d):
            break
    primitive = DirichletCharacter.from_function(d, lambda g: chi.angle(_unit_lift(g, d, chi.modulus)))
    return d, primitive


def split_character(eta: DirichletCharacter, n1: int) -> tuple[DirichletCharacter, DirichletCharacter]:
    """eta = chi1 * chi2 with chi1 mod n1 and chi2 mod modulus/n1 (coprime factors)."""
    n2 = eta.modulus // n1
    if n1 * n2 != eta.modulus or math.gcd(n1, n2) != 1:
        raise PreconditionError(f"{n1} is not a unitary divisor of {eta.modulus}")
    chi1 = DirichletCharacter.from_function(n1, lambda g: eta.angle(crt_lift(g, n1, n2)))
    chi2 = DirichletCharacter.from_function(n2, lambda g: eta.angle(crt_lift(g, n2, n1)))
    return chi1, chi2


# ---------- quadratic characters ----------


def is_fundamental_discriminant(d: int) -> bool:
    if d == 1:
        return True
    if d % 4 == 1:
        return all(e == 1 for e in factorint(abs(d)).values())
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and all(e == 1 for e in factorint(abs(m)).values())
    return False


def kronecker_symbol(d: int, a: int) -> int:
    """(d / a) for a > 0."""
    if a <= 0:
        raise PreconditionError("kronecker_symbol expects a positive lower argument")
    v2 = int(multiplicity(2, a))
    odd = a >> v2
    result = 1
    if v2:
        if d % 2 == 0:
            return 0
        result = (1 if d % 8 in (1, 7) else -1) ** v2
    if odd > 1:
        result *= int(jacobi_symbol(d % odd, odd))
    return result


@lru_cache(maxsize=None)
def kronecker_character(d: int) -> DirichletCharacter:
    """Dirichlet character of the fundamental discriminant d, modulus |d|."""
    if not is_fundamental_discriminant(d):
        raise PreconditionError(f"{d} is not a fundamental discriminant")
    return DirichletCharacter.from_function(
        abs(d), lambda g: Fraction(0) if kronecker_symbol(d, g) == 1 else Fraction(1, 2)
    )


def character_from_descriptor(descriptor: str, modulus: int) -> DirichletCharacter:
    """'trivial', 'odd4', 'kron:<D>' or 'angles:<a1>,<a2>,...' as a character mod modulus."""
    descriptor = descriptor.strip().lower()
    if descriptor == "trivial":
        base = DirichletCharacter.trivial(1)
    elif descriptor == "odd4":
        base = kronecker_character(-4)
    elif descriptor.startswith("kron:"):
        base = kronecker_character(int(descriptor[5:]))
    elif descriptor.startswith("angles:"):
        parts = [p for p in descriptor[7:].split(",") if p]
        return DirichletCharacter(modulus, tuple(Fraction(p) for p in parts))
    else:
        raise PreconditionError(f"unknown character descriptor {descriptor!r}")
    return base.lift(modulus)


# ---------- Gauss sums and square roots ----------


def gauss_sum(eta: DirichletCharacter) -> CyclotomicNumber:
    """sum over nu mod F of eta(nu) zeta_F^nu, in Q(zeta_lcm(F, order))."""
    if not eta.is_primitive():
        raise PreconditionError(f"Gauss sum of an imprimitive character mod {eta.modulus} is out of scope")
    f = eta.modulus
    m = math.lcm(f, eta.order)
    terms: dict[int, int] = {}
    for nu, angle in eta.table.items():
        nu = nu or f
        j = (int(angle * m) + nu * (m // f)) % m
        terms[j] = terms.get(j, 0) + 1
    return CyclotomicNumber.from_powers(m, terms)


@lru_cache(maxsize=None)
def cyclotomic_sqrt(m: int) -> CyclotomicNumber:
    """Principal square root of the integer m (positive real, or i times one) via quadratic Gauss sums."""
    if m == 0:
        return CyclotomicNumber.rational(0)
    root = CyclotomicNumber.rational(1)
    for p, e in factorint(abs(m)).items():
        root = root * p ** (e // 2)
        if e % 2 == 0:
            continue
        if p == 2:
            r = CyclotomicNumber.zeta(8) + CyclotomicNumber.zeta(8, 7)
        elif p % 4 == 1:
            r = gauss_sum(kronecker_character(p))
        else:
            r = gauss_sum(kronecker_character(-p)) * -CyclotomicNumber.zeta(4)
        root = root * r
    if m < 0:
        root = root * CyclotomicNumber.zeta(4)
    return root


# ---------- generalized Bernoulli numbers ----------


@lru_cache(maxsize=None)
def _bernoulli_poly(n: int) -> Poly:
    return Poly(bernoulli(n, _t), _t)


def generalized_bernoulli(n: int, eta: DirichletCharacter) -> CyclotomicNumber:
    """B_{n,eta} = F^(n-1) sum_{a=1}^F eta(a) B_n(a/F); B_{1,trivial} = +1/2."""
    f = eta.modulus
    poly = _bernoulli_poly(n)
    acc = CyclotomicNumber.rational(0)
    for a in range(1, f + 1):
        value = eta(a)
        if not value.is_zero():
            acc = acc + value * to_fraction(poly.eval(Rational(a, f)))
    return acc * Fraction(f) ** (n - 1)


def _series_inverse(coeffs: list[Fraction], order: int) -> list[Fraction]:
    inv = [Fraction(1) / coeffs[0]]
    for i in range(1, order + 1):
        s = sum((coeffs[j] * inv[i - j] for j in range(1, min(i, len(coeffs) - 1) + 1)), Fraction(0))
        inv.append(-s / coeffs[0])
    return inv


def bernoulli_by_series(n: int, eta: DirichletCharacter) -> CyclotomicNumber:
    """B_{n,eta} read off sum_a eta(a) t e^(at) / (e^(Ft) - 1) truncated at t^n."""
    f = eta.modulus
    den = [Fraction(f ** (j + 1), math.factorial(j + 1)) for j in range(n + 1)]
    den_inv = _series_inverse(den, n)
    acc = CyclotomicNumber.rational(0)
    for a in range(1, f + 1):
        value = eta(a)
        if value.is_zero():
            continue
        coeff = sum((Fraction(a**j, math.factorial(j)) * den_inv[n - j] for j in range(n + 1)), Fraction(0))
        acc = acc + value * coeff
    return acc * math.factorial(n)


def numeric_l_value(eta: DirichletCharacter, s) -> mpmath.mpc:
    """L(s, eta) = F^-s sum_a eta(a) zeta(s, a/F), Hurwitz zeta, Re s > 1."""
    f = eta.modulus
    total = mpmath.mpc(0)
    for a in range(1, f + 1):
        value = eta(a)
        if not value.is_zero():
            total += value.to_complex() * mpmath.zeta(s, mpmath.mpf(a) / f)
    return total * mpmath.power(f, -s)


# ---------- the L-value bracket ----------


@dataclass(frozen=True)
class GaussUnitPart:
    gauss_sum: CyclotomicNumber  # G(eta_h)
    conductor: int  # N_h
    n1: int  # part of N_h at primes dividing the level
    n2: int
    mu: CyclotomicNumber  # G(eta) = mu G(chi1) G(chi2)
    epsilon2: int  # chi2(-1) = (-1)^epsilon2, so G(chi2) = i^epsilon2 sqrt(n2)
    normalized: CyclotomicNumber  # G(eta) / sqrt(N_h)


@dataclass(frozen=True)
class LValueBracket:
    value: PiScalar
    bernoulli_part: CyclotomicNumber
    gauss_unit_part: GaussUnitPart
    euler_factor: CyclotomicNumber
    eta: DirichletCharacter
    weight_gap: int  # k - n


def level_part(m: int, level: int) -> int:
    """Largest divisor of m supported on primes dividing level."""
    out = 1
    for p, e in factorint(m).items():
        if level % p == 0:
            out *= p**e
    return out


def l_value_bracket(
    k: int, n: int, chi: DirichletCharacter, rho: DirichletCharacter, level: int
) -> LValueBracket:
    """pi^(n-k) N_h^(k-n-1/2) L^N(k-n, chi*rho) as an exact algebraic number.

    The Gauss sum is split over N_h = n1 * n2 (n1 supported on primes dividing
    the level) so that only sqrt(n1) enters the value; G(chi2)/sqrt(n2) is the
    root of unity i^epsilon2.
    """
    m = k - n
    if m < 1:
        raise PreconditionError(f"k - n must be at least 1, got k={k}, n={n}")
    conductor, eta = conductor_and_primitive(chi * rho)
    eps = eta.parity
    if (m - eps) % 2:
        raise PreconditionError(
            f"bracket vanishes by parity: L(k-n, eta_h) formula inapplicable (k-n={m}, eta(-1)={(-1) ** eps})"
        )

    n1 = level_part(conductor, level)
    n2 = conductor // n1
    chi1, chi2 = split_character(eta, n1)
    g1, g2 = gauss_sum(chi1), gauss_sum(chi2)
    mu = chi1(n2) * chi2(n1)
    g_eta = gauss_sum(eta)
    if g_eta != mu * g1 * g2:
        raise InternalInvariantError(f"Gauss sum factorization failed for conductor {conductor} = {n1}*{n2}")
    eps2 = chi2.parity
    i = CyclotomicNumber.zeta(4)
    normalized = mu * i**eps2 * g1 / cyclotomic_sqrt(n1)

    bern = generalized_bernoulli(m, eta.conj())
    euler = CyclotomicNumber.rational(1)
    for ell in factorint(level):
        euler = euler * (1 - eta(ell) * Fraction(1, ell**m))
    sign = -1 if (1 + (m - eps) // 2) % 2 else 1
    value = normalized * (i**eps).inverse() * Fraction(sign * 2**m, 2 * math.factorial(m)) * bern * euler
    logger.debug("bracket k=%s n=%s conductor=%s split=%sx%s", k, n, conductor, n1, n2)
    return LValueBracket(
        value=PiScalar(value, 0),
        bernoulli_part=bern,
        gauss_unit_part=GaussUnitPart(g_eta, conductor, n1, n2, mu, eps2, normalized),
        euler_factor=euler,
        eta=eta,
        weight_gap=m,
    )


def character_to_json(chi: DirichletCharacter) -> dict:
    return {"modulus": chi.modulus, "generator_images": [str(a) for a in chi.angles]}


def character_from_json(data: dict) -> DirichletCharacter:
    return DirichletCharacter(int(data["modulus"]), tuple(Fraction(a) for a in data["generator_images"]))
