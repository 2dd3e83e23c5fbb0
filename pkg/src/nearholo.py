"""Nearly holomorphic q-expansions and the Maass-Shimura raising operator.

Coefficients are polynomials in the entries W_ab (a <= b) of W = (4 pi Y)^-1.
The operator is computed on symbols D^alpha * W^mu * e(tr SZ) with the
normalized partials d'_ij = (2 pi i)^-1 d_ij (half convention off the diagonal):

    d'_ij W_ab    = (W_ai W_jb + W_aj W_ib) / 2
    d'_ij D^alpha = -alpha W_ij D^alpha          D = det(Z - conj Z)
    d'_ij e(tr SZ) = S_ij e(tr SZ)

so delta_k f = D^-alpha det(d'_ij)(D^alpha f) with alpha = k + (1 - m)/2, and
Delta_k = (2 pi i)^m delta_k.
"""
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, partial
from typing import Optional, Sequence

from sympy import Basic, Matrix, Poly, Rational, eye, symbols
from sympy.combinatorics import Permutation

from . import config
from .eisenstein import (
    OUTSIDE_HYPOTHESES,
    CoefficientVerdict,
    EisensteinSpec,
    IntegralityReport,
    NormalizedExpansion,
    build_expansion,
    hypotheses_hold,
)
from .errors import ArithmeticDomainError, InternalInvariantError, PreconditionError
from .exactnum import (
    CyclotomicNumber,
    PiScalar,
    cyclo_from_json,
    cyclo_to_json,
    p_valuation,
    rational_valuation,
    to_fraction,
)
from .quadforms import HalfIntegralMatrix, matrix_from_json, matrix_to_json

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]


@lru_cache(maxsize=None)
def w_pairs(m: int) -> tuple[tuple[int, int], ...]:
    """Canonical order of the independent entries W_ab, a <= b (0-based)."""
    return tuple((a, b) for a in range(m) for b in range(a, m))


@lru_cache(maxsize=None)
def _pair_slot(m: int) -> dict[tuple[int, int], int]:
    slots = {}
    for idx, (a, b) in enumerate(w_pairs(m)):
        slots[(a, b)] = slots[(b, a)] = idx
    return slots


def _bump(mono: Monomial, slot: int, by: int = 1) -> Monomial:
    out = list(mono)
    out[slot] += by
    return tuple(out)


# ---------- coefficient polynomials ----------


@dataclass(frozen=True, eq=False)
class NHPoly:
    """Polynomial in the W_ab with PiScalar coefficients; zero terms are never stored."""

    m: int
    terms: dict = field(default_factory=dict)  # Monomial -> PiScalar

    @classmethod
    def constant(cls, m: int, value: PiScalar) -> "NHPoly":
        zero = (0,) * len(w_pairs(m))
        return cls(m, {} if value.is_zero() else {zero: value})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(mono) for mono in self.terms), default=-1)

    def constant_term(self) -> PiScalar:
        return self.terms.get((0,) * len(w_pairs(self.m)), PiScalar.of(0))

    def __add__(self, other: "NHPoly") -> "NHPoly":
        out = dict(self.terms)
        for mono, c in other.terms.items():
            total = out[mono] + c if mono in out else c
            if total.is_zero():
                out.pop(mono, None)
            else:
                out[mono] = total
        return NHPoly(self.m, out)

    def scale(self, factor) -> "NHPoly":
        if isinstance(factor, PiScalar) and factor.is_zero():
            return NHPoly(self.m)
        return NHPoly(self.m, {mono: c * factor for mono, c in self.terms.items() if not (c * factor).is_zero()})

    def shift_pi(self, by: int) -> "NHPoly":
        return NHPoly(self.m, {mono: PiScalar(c.value, c.pi_exponent + by) for mono, c in self.terms.items()})

    def specialize_zero(self, slots: Sequence[int]) -> "NHPoly":
        """Set the given W entries to zero."""
        return NHPoly(self.m, {mono: c for mono, c in self.terms.items() if not any(mono[s] for s in slots)})

    def min_valuation(self, p: int) -> float:
        return min((p_valuation(c.value, p) for c in self.terms.values()), default=math.inf)

    def __eq__(self, other):
        if not isinstance(other, NHPoly):
            return NotImplemented
        return (self + other.scale(-1)).is_zero()

    def __hash__(self):
        return hash(tuple(sorted(self.terms)))

    def to_json(self) -> list[dict]:
        rows = []
        for mono in sorted(self.terms):
            c = self.terms[mono]
            names = {f"W_{a + 1}{b + 1}": e for (a, b), e in zip(w_pairs(self.m), mono) if e}
            rows.append({"monomial": names, "value": cyclo_to_json(c.value), "pi_exp": c.pi_exponent})
        return rows

    @classmethod
    def from_json(cls, m: int, rows: list[dict]) -> "NHPoly":
        slots = {f"W_{a + 1}{b + 1}": idx for idx, (a, b) in enumerate(w_pairs(m))}
        terms = {}
        for row in rows:
            mono = [0] * len(slots)
            for name, e in row["monomial"].items():
                mono[slots[name]] = int(e)
            terms[tuple(mono)] = PiScalar(cyclo_from_json(row["value"]), int(row.get("pi_exp", 0)))
        return cls(m, terms)


@dataclass
class NHExpansion:
    degree: int
    weight: int
    level: int
    coefficients: dict[HalfIntegralMatrix, NHPoly]
    variable: str = "W"  # W = (4 pi Y)^-1, or V = (2 pi Y)^-1
    pi_ledger: Optional[int] = None
    scale: Optional[Fraction] = None

    def is_holomorphic(self) -> bool:
        return all(poly.degree() <= 0 for poly in self.coefficients.values())

    def w_degree(self) -> int:
        return max((poly.degree() for poly in self.coefficients.values()), default=-1)

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "weight": self.weight,
            "level": self.level,
            "variable": self.variable,
            "pi_ledger": self.pi_ledger,
            "scale": None if self.scale is None else str(self.scale),
            "coeffs": [{"S": matrix_to_json(s), "poly": poly.to_json()} for s, poly in self.coefficients.items()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "NHExpansion":
        m = int(data["degree"])
        coeffs = {matrix_from_json(row["S"]): NHPoly.from_json(m, row["poly"]) for row in data["coeffs"]}
        scale = data.get("scale")
        return cls(m, int(data["weight"]), int(data["level"]), coeffs, data.get("variable", "W"),
                   data.get("pi_ledger"), None if scale is None else Fraction(scale))


def from_holomorphic(exp: NormalizedExpansion) -> NHExpansion:
    m = exp.spec.size
    coeffs = {h: NHPoly.constant(m, value) for h, value in exp.coefficients.items()}
    return NHExpansion(m, exp.spec.k, exp.spec.level, coeffs, pi_ledger=exp.normalization.pi_exponent)


# ---------- symbol algebra ----------


@dataclass(frozen=True)
class DiffSymbol:
    """scalar * D^d_power * prod W_ab^w * prod h_ab^h * e(tr hZ)."""

    scalar: Fraction
    d_power: Fraction
    w: Monomial
    h: Monomial

    def derive(self, i: int, j: int) -> list["DiffSymbol"]:
        m = self._m()
        slot = _pair_slot(m)
        out = []
        if self.d_power:
            out.append(DiffSymbol(-self.scalar * self.d_power, self.d_power, _bump(self.w, slot[(i, j)]), self.h))
        for idx, e in enumerate(self.w):
            if not e:
                continue
            a, b = w_pairs(m)[idx]
            base = _bump(self.w, idx, -1)
            half = self.scalar * e / 2
            out.append(DiffSymbol(half, self.d_power, _bump(_bump(base, slot[(a, i)]), slot[(j, b)]), self.h))
            out.append(DiffSymbol(half, self.d_power, _bump(_bump(base, slot[(a, j)]), slot[(i, b)]), self.h))
        out.append(DiffSymbol(self.scalar, self.d_power, self.w, _bump(self.h, slot[(i, j)])))
        return out

    def _m(self) -> int:
        # len(w) = m(m+1)/2
        return (math.isqrt(8 * len(self.w) + 1) - 1) // 2


def _collect(syms: list[DiffSymbol]) -> list[DiffSymbol]:
    acc: dict[tuple, Fraction] = {}
    for s in syms:
        key = (s.d_power, s.w, s.h)
        acc[key] = acc.get(key, Fraction(0)) + s.scalar
    return [DiffSymbol(c, d, w, h) for (d, w, h), c in sorted(acc.items()) if c]


@lru_cache(maxsize=None)
def det_operator_symbols(m: int, alpha: Fraction, w: Monomial) -> tuple[DiffSymbol, ...]:
    """det(d'_ij) applied to D^alpha W^w e(tr hZ), expanded over permutations."""
    start = DiffSymbol(Fraction(1), alpha, w, (0,) * len(w_pairs(m)))
    total: list[DiffSymbol] = []
    for sigma in itertools.permutations(range(m)):
        sign = Permutation(list(sigma)).signature()
        current = [start]
        for i in range(m):
            current = _collect([t for s in current for t in s.derive(i, sigma[i])])
        total.extend(DiffSymbol(sign * s.scalar, s.d_power, s.w, s.h) for s in current)
    return tuple(_collect(total))


def _mark_value(s: HalfIntegralMatrix, h: Monomial) -> Fraction:
    value = Fraction(1)
    for (a, b), e in zip(w_pairs(s.size), h):
        if e:
            value *= s.entries[a][b] ** e
    return value


def raising_alpha(weight: int, m: int) -> Fraction:
    return weight + Fraction(1 - m, 2)


def delta_poly(poly: NHPoly, s: HalfIntegralMatrix, weight: int) -> NHPoly:
    """delta_k of poly(W) e(tr SZ), returned as the polynomial multiplying e(tr SZ)."""
    m = poly.m
    alpha = raising_alpha(weight, m)
    out: dict[Monomial, PiScalar] = {}
    for mono, c in poly.terms.items():
        for sym in det_operator_symbols(m, alpha, mono):
            if sym.d_power != alpha:
                raise InternalInvariantError(f"residual D-power {sym.d_power - alpha} at index {s}")
            factor = sym.scalar * _mark_value(s, sym.h)
            if not factor:
                continue
            term = c * factor
            out[sym.w] = out[sym.w] + term if sym.w in out else term
    return NHPoly(m, {mono: c for mono, c in out.items() if not c.is_zero()})


def _delta_task(weight: int, item):
    s, poly = item
    return s, delta_poly(poly, s, weight)


def _delta_once(f: NHExpansion, workers: int) -> NHExpansion:
    items = list(f.coefficients.items())
    task = partial(_delta_task, f.weight)
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, items))
    else:
        results = [task(item) for item in items]
    coeffs = {s: poly for s, poly in results if not poly.is_zero()}
    out = NHExpansion(f.degree, f.weight + 2, f.level, coeffs, f.variable, f.pi_ledger, f.scale)
    if out.w_degree() > max(f.w_degree(), 0) + f.degree:
        raise InternalInvariantError("W-degree grew by more than the degree")
    return out


def _two_pi_i_power(m: int, r: int) -> PiScalar:
    """(2 pi i)^(m r)."""
    e = m * r
    return PiScalar(CyclotomicNumber.zeta(4, e) * 2**e, e)


def _times(f: NHExpansion, factor: PiScalar) -> NHExpansion:
    coeffs = {s: poly.scale(factor) for s, poly in f.coefficients.items()}
    return NHExpansion(f.degree, f.weight, f.level, coeffs, f.variable, f.pi_ledger, f.scale)


def maass_delta(f: NHExpansion, workers: Optional[int] = None) -> NHExpansion:
    """Delta_k f, weight k+2; coefficients carry pi^m."""
    if f.variable != "W":
        raise PreconditionError("Maass operator acts on expansions in the W variable")
    delta = _delta_once(f, workers if workers is not None else config.WORKERS)
    return _times(delta, _two_pi_i_power(f.degree, 1))


def integral_at(f: NHExpansion, p: int) -> bool:
    return all(poly.min_valuation(p) >= 0 for poly in f.coefficients.values())


def delta_iterate(
    f: NHExpansion, r: int, primes: Sequence[int] = (), workers: Optional[int] = None
) -> tuple[NHExpansion, NHExpansion]:
    """(Delta_k^r f, delta_k^r f) with delta_k^r = (-i/2)^(mr) pi^(-mr) Delta_k^r.

    For each p in primes with p not dividing 2N, an integral input must give an
    integral delta_k^r f.
    """
    if r < 1:
        raise PreconditionError(f"r must be positive, got {r}")
    if f.variable != "W":
        raise PreconditionError("Maass operator acts on expansions in the W variable")
    workers = workers if workers is not None else config.WORKERS
    watched = [p for p in primes if (2 * f.level) % p and integral_at(f, p)]
    delta = f
    for step in range(r):
        delta = _delta_once(delta, workers)
        logger.debug("delta step %s: weight %s, %s indices", step + 1, delta.weight, len(delta.coefficients))
    for p in watched:
        if not integral_at(delta, p):
            raise InternalInvariantError(f"O_{p} not preserved by delta^{r}")
    return _times(delta, _two_pi_i_power(f.degree, r)), delta


def _sympy_entry(x):
    if isinstance(x, Basic):
        return x
    q = to_fraction(x)
    return Rational(q.numerator, q.denominator)


def lambda_i(z: Sequence[Sequence], i: int):
    """Coefficient of t^(m-i) in det(t I_m + Z)."""
    m = len(z)
    if not 0 <= i <= m:
        raise PreconditionError(f"lambda index {i} outside 0..{m}")
    t = symbols("t")
    mat = Matrix([[_sympy_entry(x) for x in row] for row in z])
    value = Poly((t * eye(m) + mat).det(), t).all_coeffs()[i]
    if getattr(value, "is_Rational", False):
        return Fraction(int(value.p), int(value.q))
    return value


# ---------- structure check ----------


@dataclass(frozen=True)
class StructureReport:
    r: int
    passed: bool
    max_w_degree: int
    rows: list[dict]

    def to_json(self) -> dict:
        return {"r": self.r, "passed": self.passed, "max_w_degree": self.max_w_degree, "rows": self.rows}


def panchishkin_structure_check(f: NHExpansion, r: int, primes: Sequence[int] = ()) -> StructureReport:
    """Shape of delta_k^r f for holomorphic f.

    Per index S: total W-degree at most m r, integrality kept at every listed
    p not dividing 2N, and the W-free part equal to det(S)^r times the input.
    """
    if not f.is_holomorphic():
        raise PreconditionError("structure check needs a holomorphic input")
    if r == 0:
        return StructureReport(0, True, 0, [])
    _, delta = delta_iterate(f, r)
    m = f.degree
    rows = []
    for s, poly in f.coefficients.items():
        out = delta.coefficients.get(s, NHPoly(m))
        problems = []
        if out.degree() > m * r:
            problems.append(f"W-degree {out.degree()} exceeds {m * r}")
        for p in primes:
            if (2 * f.level) % p and poly.min_valuation(p) >= 0 and out.min_valuation(p) < 0:
                problems.append(f"not integral at {p}")
        expected = poly.constant_term() * (s.det() ** r)
        if not (out.constant_term() - expected).is_zero():
            problems.append("W-free part differs from det(S)^r times the input")
        rows.append({"S": str(s), "w_degree": out.degree(), "problems": problems})
        if problems:
            logger.warning("structure check failed at %s: %s", s, "; ".join(problems))
    passed = all(not row["problems"] for row in rows)
    return StructureReport(r, passed, delta.w_degree(), rows)


# ---------- E(Z, -m0) ----------


def minus_m0_factor(n: int, k: int, m0: int) -> Fraction:
    """d = prod_{a=1}^{2n} prod_{b=1}^{m0} (2 m0 - k - b + (a+1)/2)."""
    d = Fraction(1)
    for a in range(1, 2 * n + 1):
        for b in range(1, m0 + 1):
            d *= 2 * m0 - k - b + Fraction(a + 1, 2)
    return d


def theorem_pi_exponent(n: int, k: int, m0: int) -> int:
    return n + n * n - (2 * n + 1) * k + (2 * n + 2) * m0


def eisenstein_at_minus_m0(
    spec: EisensteinSpec,
    index_bound: int,
    primes: Sequence[int] = (),
    workers: Optional[int] = None,
) -> NHExpansion:
    """Normalized expansion of E(Z, -m0) at weight k from the holomorphic one at weight k - 2 m0.

    The result is d^-1 (-4)^(n m0) Delta^m0 applied to the weight k - 2 m0
    expansion, with the pi powers moved into pi_ledger.
    """
    n, k, m0 = spec.n, spec.k, spec.m0
    base = build_expansion(spec.base(), index_bound, workers)
    holo = from_holomorphic(base)
    if m0 == 0:
        return holo
    d = minus_m0_factor(n, k, m0)
    if d == 0:
        raise InternalInvariantError(f"d vanishes for n={n}, k={k}, m0={m0}")
    for p in primes:
        if p % 2 and p >= 2 * k and rational_valuation(d, p) != 0:
            raise InternalInvariantError(f"p={p} divides d={d} although p >= 2k")
    raised, _ = delta_iterate(holo, m0, primes, workers)
    scale = Fraction((-4) ** (n * m0)) / d
    coeffs = {}
    pi_seen = set()
    for s, poly in raised.coefficients.items():
        pi_seen.update(c.pi_exponent for c in poly.terms.values())
        coeffs[s] = poly.scale(scale)
    if len(pi_seen) > 1:
        raise InternalInvariantError(f"mixed pi exponents {sorted(pi_seen)} after raising")
    carried = pi_seen.pop() if pi_seen else 2 * n * m0
    coeffs = {s: poly.shift_pi(-carried) for s, poly in coeffs.items()}
    ledger = base.normalization.pi_exponent - carried
    if ledger != theorem_pi_exponent(n, k, m0):
        raise InternalInvariantError(f"pi ledger {ledger} != {theorem_pi_exponent(n, k, m0)}")
    logger.info("E(Z,-%s) at weight %s: %s indices, d=%s, pi ledger %s", m0, k, len(coeffs), d, ledger)
    return NHExpansion(2 * n, k, spec.level, coeffs, "W", ledger, scale)


def nh_integrality_report(f: NHExpansion, p: int) -> IntegralityReport:
    within = hypotheses_hold(p, f.weight, f.level)
    label = "within theorem hypotheses" if within else OUTSIDE_HYPOTHESES
    verdicts = []
    for s, poly in f.coefficients.items():
        try:
            v = poly.min_valuation(p)
        except ArithmeticDomainError as exc:
            verdicts.append(CoefficientVerdict(s, None, None, {"error": str(exc)}))
            continue
        pi_ok = all(c.pi_exponent == 0 for c in poly.terms.values())
        passed = v >= 0 and pi_ok
        verdicts.append(CoefficientVerdict(s, v, passed, {"w_degree": poly.degree()}))
        if not passed:
            logger.log(logging.WARNING if within else logging.INFO,
                       "coefficient at %s has %s-adic valuation %s (%s)", s, p, v, label)
    return IntegralityReport(p, label, within, verdicts)


def to_two_pi_y_variable(f: NHExpansion) -> NHExpansion:
    """Rewrite in V = (2 pi Y)^-1 = 2W: the V^mu coefficient is the W^mu one times 2^-|mu|."""
    if f.variable == "V":
        return f
    coeffs = {
        s: NHPoly(poly.m, {mono: c * Fraction(1, 2 ** sum(mono)) for mono, c in poly.terms.items()})
        for s, poly in f.coefficients.items()
    }
    return NHExpansion(f.degree, f.weight, f.level, coeffs, "V", f.pi_ledger, f.scale)
