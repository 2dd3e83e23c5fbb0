"""Half-integral Fourier indices, their discriminant data, and local invariants of symmetric matrices."""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from sympy import Matrix, Rational, factorint, legendre_symbol

from .characters import DirichletCharacter, kronecker_character
from .errors import InternalInvariantError, PreconditionError
from .exactnum import rational_valuation, to_fraction

logger = logging.getLogger(__name__)

Rows = tuple[tuple[Fraction, ...], ...]


def as_rows(rows: Sequence[Sequence]) -> Rows:
    return tuple(tuple(to_fraction(x) for x in row) for row in rows)


def fraction_det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    if not rows:
        return Fraction(1)
    return to_fraction(Matrix([[Rational(x.numerator, x.denominator) for x in row] for row in rows]).det())


def mat_mul(a: Rows, b: Rows) -> Rows:
    return tuple(
        tuple(sum((a[i][t] * b[t][j] for t in range(len(b))), Fraction(0)) for j in range(len(b[0])))
        for i in range(len(a))
    )


def transpose(a: Rows) -> Rows:
    return tuple(zip(*a))


# ---------- Fourier indices ----------


@dataclass(frozen=True)
class HalfIntegralMatrix:
    """Symmetric h with level*h half-integral: integral diagonal, off-diagonal in (1/2)Z."""

    entries: Rows
    level: int = 1

    def __post_init__(self):
        rows = as_rows(self.entries)
        size = len(rows)
        if any(len(row) != size for row in rows):
            raise PreconditionError("index matrix must be square")
        for i in range(size):
            for j in range(size):
                if rows[i][j] != rows[j][i]:
                    raise PreconditionError("index matrix must be symmetric")
                scale = self.level if i == j else 2 * self.level
                if (rows[i][j] * scale).denominator != 1:
                    raise PreconditionError(
                        f"entry ({i},{j}) = {rows[i][j]} is not in the index lattice of level {self.level}"
                    )
        object.__setattr__(self, "entries", rows)

    @classmethod
    def diagonal(cls, *values, level: int = 1) -> "HalfIntegralMatrix":
        size = len(values)
        return cls(tuple(tuple(to_fraction(values[i]) if i == j else Fraction(0) for j in range(size))
                         for i in range(size)), level)

    @classmethod
    def binary(cls, a, b, c, level: int = 1) -> "HalfIntegralMatrix":
        """[[a, b/2], [b/2, c]] / level, with a, b, c integers."""
        return cls(((Fraction(a, level), Fraction(b, 2 * level)), (Fraction(b, 2 * level), Fraction(c, level))), level)

    @property
    def size(self) -> int:
        return len(self.entries)

    def det(self) -> Fraction:
        return fraction_det(self.entries)

    def trace(self) -> Fraction:
        return sum((self.entries[i][i] for i in range(self.size)), Fraction(0))

    def two_level_h(self) -> tuple[tuple[int, ...], ...]:
        """2*level*h, an even integral matrix."""
        return tuple(tuple(int(x * 2 * self.level) for x in row) for row in self.entries)

    def det_two_level_h(self) -> int:
        return int(fraction_det(as_rows(self.two_level_h())))

    def leading_minors(self) -> list[Fraction]:
        return [fraction_det([row[:i] for row in self.entries[:i]]) for i in range(1, self.size + 1)]

    def is_positive_definite(self) -> bool:
        return all(m > 0 for m in self.leading_minors())

    def is_positive_semidefinite(self) -> bool:
        idx = range(self.size)
        for r in range(1, self.size + 1):
            for subset in itertools.combinations(idx, r):
                if fraction_det([[self.entries[i][j] for j in subset] for i in subset]) < 0:
                    return False
        return True

    def key(self) -> tuple:
        """Sort key: trace first, then row-major entries."""
        return (self.trace(), tuple(x for row in self.entries for x in row))

    def __str__(self):
        return "[" + "; ".join(",".join(str(x) for x in row) for row in self.entries) + "]"


@dataclass(frozen=True)
class DiscriminantData:
    delta: int  # (-1)^n det(2 * level * h)
    fundamental_discriminant: int
    conductor: int  # C_h = |D_h|
    square_part: int  # f with delta = D_h f^2
    rho: DirichletCharacter


def fundamental_part(delta: int) -> tuple[int, int]:
    """(D, f) with delta = D f^2 and D a fundamental discriminant."""
    if delta == 0:
        raise PreconditionError("singular h: discriminant is zero")
    if delta % 4 not in (0, 1):
        raise InternalInvariantError(f"{delta} is not a discriminant")
    squarefree, square = (-1 if delta < 0 else 1), 1
    for p, e in factorint(abs(delta)).items():
        squarefree *= p ** (e % 2)
        square *= p ** (e // 2)
    if squarefree % 4 == 1:
        return squarefree, square
    return 4 * squarefree, square // 2


def discriminant_data(h: HalfIntegralMatrix, n: int) -> DiscriminantData:
    """Fundamental discriminant and character of Q(sqrt((-1)^n det(2h)))."""
    if h.size != 2 * n:
        raise PreconditionError(f"expected a {2 * n}x{2 * n} index, got size {h.size}")
    if h.det() == 0:
        raise PreconditionError("singular h")
    delta = (-1) ** n * h.det_two_level_h()
    d, f = fundamental_part(delta)
    return DiscriminantData(delta, d, abs(d), f, kronecker_character(d))


def enumerate_positive_indices(size: int, level: int, bound: int) -> Iterator[HalfIntegralMatrix]:
    """Positive definite h with level*h half-integral and trace(level*h) <= bound, by trace then entries."""

    def extend(diag: list[int]):
        if len(diag) == size:
            yield from _off_diagonals(diag)
            return
        used = sum(diag)
        for d in range(1, bound - used - (size - len(diag) - 1) + 1):
            yield from extend(diag + [d])

    def _off_diagonals(diag: list[int]):
        pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]

        def fill(t: dict, rest):
            if not rest:
                rows = [[Fraction(diag[i]) if i == j else t.get((min(i, j), max(i, j)), Fraction(0))
                         for j in range(size)] for i in range(size)]
                h = HalfIntegralMatrix(tuple(tuple(x / level for x in row) for row in rows), level)
                if h.is_positive_definite():
                    yield h
                return
            i, j = rest[0]
            limit = math.isqrt(4 * diag[i] * diag[j])
            for b in range(-limit, limit + 1):
                if b * b < 4 * diag[i] * diag[j]:
                    yield from fill({**t, (i, j): Fraction(b, 2)}, rest[1:])

        yield from fill({}, pairs)

    if bound < size:
        return iter(())
    found = list(extend([]))
    found.sort(key=lambda h: h.key())
    return iter(found)


# ---------- local invariants ----------


@dataclass(frozen=True)
class QuadSpaceClass:
    rank: int
    epsilon: int


def residue(x: Fraction, p: int) -> int:
    if x.denominator % p == 0:
        raise PreconditionError(f"{x} is not {p}-integral")
    return x.numerator * pow(x.denominator, -1, p) % p


def diagonalize_mod_p(rows: Sequence[Sequence], p: int) -> list[int]:
    """Nonzero diagonal of a congruent diagonal form of a symmetric matrix over F_p (p odd)."""
    a = [[residue(to_fraction(x), p) for x in row] for row in rows]
    size = len(a)
    active = list(range(size))
    diag = []
    while active:
        piv = next((i for i in active if a[i][i]), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active if i < j and a[i][j]), None)
            if pair is None:
                break
            i, j = pair
            for t in range(size):
                a[i][t] = (a[i][t] + a[j][t]) % p
            for t in range(size):
                a[t][i] = (a[t][i] + a[t][j]) % p
            piv = i
        inv = pow(a[piv][piv], -1, p)
        diag.append(a[piv][piv])
        active.remove(piv)
        for r in active:
            factor = a[r][piv] * inv % p
            if factor:
                for t in range(size):
                    a[r][t] = (a[r][t] - factor * a[piv][t]) % p
                for t in range(size):
                    a[t][r] = (a[t][r] - factor * a[t][piv]) % p
    return diag


def classify_mod_p(s: Sequence[Sequence], p: int) -> QuadSpaceClass:
    """Rank d of S mod p and the split sign of its nondegenerate part.

    The nondegenerate part is S modulo its radical. For odd d the sign is not
    used and is reported as +1.
    """
    if p == 2:
        raise PreconditionError("dyadic classification out of scope")
    diag = diagonalize_mod_p(s, p)
    d = len(diag)
    if d % 2:
        return QuadSpaceClass(d, 1)
    disc = (-1) ** (d // 2) * math.prod(diag) % p
    return QuadSpaceClass(d, int(legendre_symbol(disc, p)))


def smith_valuations(rows: Sequence[Sequence], p: int) -> list[float]:
    """p-adic valuations of the elementary divisors (math.inf for zero ones)."""
    a = [[to_fraction(x) for x in row] for row in rows]
    n_rows = len(a)
    n_cols = len(a[0]) if a else 0
    vals: list[float] = []
    for k in range(min(n_rows, n_cols)):
        best = None
        for i in range(k, n_rows):
            for j in range(k, n_cols):
                if a[i][j]:
                    v = rational_valuation(a[i][j], p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            vals.extend([math.inf] * (min(n_rows, n_cols) - k))
            break
        v, i, j = best
        a[k], a[i] = a[i], a[k]
        for row in a:
            row[k], row[j] = row[j], row[k]
        pivot = a[k][k]
        for r in range(k + 1, n_rows):
            factor = a[r][k] / pivot
            if factor:
                a[r] = [x - factor * y for x, y in zip(a[r], a[k])]
        for c in range(k + 1, n_cols):
            a[k][c] = Fraction(0)
        vals.append(v)
    return vals


def elementary_divisor_exponent(r: Sequence[Sequence], p: int) -> int:
    """e(R) = -(sum of the non-positive elementary divisor exponents of R over Z_p)."""
    return int(sum(-v for v in smith_valuations(r, p) if v <= 0))


# ---------- JSON codec ----------


def matrix_to_json(h: HalfIntegralMatrix) -> dict:
    return {"rows": [[str(x) for x in row] for row in h.entries], "two_h": False, "level": h.level}


def matrix_from_json(data: dict) -> HalfIntegralMatrix:
    rows = as_rows(data["rows"])
    if data.get("two_h"):
        rows = tuple(tuple(x / 2 for x in row) for row in rows)
    return HalfIntegralMatrix(rows, int(data.get("level", 1)))
