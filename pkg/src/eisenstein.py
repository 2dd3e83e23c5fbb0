"""Normalized Fourier expansion of the Siegel Eisenstein series at the iota cusp.

The stored coefficient of exp(2 pi i tr(hZ)) is

    a(h) = r * pi^(n-k) b(h),   r = c_2n(k) pi^-(2nk-n^2) N^-n(2n+1),

which is the Fourier coefficient of pi^(n+n^2-(2n+1)k) Lambda^N(k/2) E*(Z).
Every a(h) is an algebraic number; pi never appears in the stored values.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Optional, Sequence

import mpmath
from sympy import factorint

from . import config
from .characters import (
    DirichletCharacter,
    LValueBracket,
    character_from_json,
    character_to_json,
    cyclotomic_sqrt,
    l_value_bracket,
    level_part,
    numeric_l_value,
)
from .errors import ArithmeticDomainError, InternalInvariantError, PreconditionError
from .exactnum import (
    CyclotomicNumber,
    PiScalar,
    UniPoly,
    cyclo_from_json,
    cyclo_to_json,
    p_valuation,
)
from .quadforms import (
    DiscriminantData,
    HalfIntegralMatrix,
    discriminant_data,
    enumerate_positive_indices,
    matrix_from_json,
    matrix_to_json,
)
from .siegelseries import check_key_valuation, pipeline_f_poly

logger = logging.getLogger(__name__)


# ---------- parameters ----------


@dataclass(frozen=True)
class EisensteinSpec:
    n: int
    k: int
    level: int
    chi: DirichletCharacter
    m0: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError(f"half-degree n must be positive, got {self.n}")
        if self.level < 1:
            raise PreconditionError(f"level must be positive, got {self.level}")
        if self.k < self.n + 1:
            raise PreconditionError(f"weight k={self.k} is below n+1={self.n + 1}")
        chi = self.chi
        if chi.modulus != self.level:
            if self.level % chi.modulus:
                raise PreconditionError(f"character modulus {chi.modulus} does not divide the level {self.level}")
            object.__setattr__(self, "chi", chi.lift(self.level))
        if self.chi.parity != self.k % 2:
            raise PreconditionError(f"chi(-1) must equal (-1)^k for k={self.k}")
        if self.k == self.n + 1 and (self.chi * self.chi).is_trivial():
            raise PreconditionError("k = n+1 needs chi^2 nontrivial")
        if self.m0 < 0 or 2 * self.m0 > self.k - self.n - 1:
            raise PreconditionError(f"m0={self.m0} outside 0 <= m0 <= (k-n-1)/2")
        if 2 * self.m0 == self.k - self.n - 1 and self.m0 > 0 and (self.chi * self.chi).is_trivial():
            raise PreconditionError("m0 = (k-n-1)/2 with chi^2 trivial is excluded")

    @property
    def size(self) -> int:
        return 2 * self.n

    def base(self) -> "EisensteinSpec":
        """The holomorphic series at weight k - 2 m0 feeding the Maass operator."""
        return EisensteinSpec(self.n, self.k - 2 * self.m0, self.level, self.chi, 0)

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "level": self.level, "chi": character_to_json(self.chi), "m0": self.m0}

    @classmethod
    def from_json(cls, data: dict) -> "EisensteinSpec":
        return cls(int(data["n"]), int(data["k"]), int(data["level"]), character_from_json(data["chi"]),
                   int(data.get("m0", 0)))


# ---------- normalization ----------


def siegel_gamma_constant(n: int, k: int) -> Fraction:
    """c_2n(k) / pi^(2nk-n^2) = (-1)^(nk) 2^(2nk-2n^2+n) prod_{j<n} 2^(2k-2j-2)/(2k-2j-2)!."""
    value = Fraction((-1) ** (n * k) * 2 ** (2 * n * k - 2 * n * n + n))
    for j in range(n):
        value *= Fraction(2 ** (2 * k - 2 * j - 2), math.factorial(2 * k - 2 * j - 2))
    return value


def displayed_constant(n: int, k: int) -> Fraction:
    value = Fraction((-1) ** (n * k) * 2 ** k)
    for j in range(n):
        value *= Fraction(2 ** (2 * k - 2 * j - 2), math.factorial(2 * k - 2 * j - 2))
    return value


@dataclass(frozen=True)
class NormalizationRecord:
    pi_exponent: int  # n + n^2 - (2n+1)k
    rational: Fraction  # r
    displayed_rational: Fraction
    lambda_tags: tuple[tuple[str, int], ...]  # Lambda^N(k/2) as L^N(s, chi^j) factors
    y_power: int = 0  # det(Y)^(s-k/2) at s = k/2

    def to_json(self) -> dict:
        return {
            "pi_exp": self.pi_exponent,
            "rational": str(self.rational),
            "displayed_rational": str(self.displayed_rational),
            "lambda": [{"L": power, "s": s} for power, s in self.lambda_tags],
            "y_power": self.y_power,
        }

    @classmethod
    def from_json(cls, data: dict) -> "NormalizationRecord":
        return cls(int(data["pi_exp"]), Fraction(data["rational"]), Fraction(data["displayed_rational"]),
                   tuple((d["L"], int(d["s"])) for d in data["lambda"]), int(data.get("y_power", 0)))


def normalization_record(spec: EisensteinSpec) -> NormalizationRecord:
    n, k, level = spec.n, spec.k, spec.level
    volume = Fraction(1, level ** (n * (2 * n + 1)))
    tags = (("chi", k),) + tuple(("chi^2", 2 * k - 2 * i) for i in range(1, n + 1))
    record = NormalizationRecord(
        pi_exponent=n + n * n - (2 * n + 1) * k,
        rational=siegel_gamma_constant(n, k) * volume,
        displayed_rational=displayed_constant(n, k) * volume,
        lambda_tags=tags,
    )
    if record.y_power != 0:
        raise InternalInvariantError("residual det(Y) power in the holomorphic normalization")
    return record


# ---------- coefficients ----------


@dataclass(frozen=True)
class CoefficientLedger:
    h: HalfIntegralMatrix
    disc: DiscriminantData
    det_part: CyclotomicNumber  # (f/(2N)^n)^(2k-2n-1) (C1/N1)^(k-n) sqrt(N1 C1)/C1
    bracket: LValueBracket
    f_polys: dict[int, UniPoly]
    f_values: dict[int, CyclotomicNumber]
    value: CyclotomicNumber  # pi^(n-k) b(h)


def coefficient_ledger(h: HalfIntegralMatrix, spec: EisensteinSpec) -> CoefficientLedger:
    """pi^(n-k) b(h) split into the determinant part, the L-value bracket and the f-values."""
    n, k, level = spec.n, spec.k, spec.level
    if h.size != spec.size or h.level != level:
        raise PreconditionError(f"index {h} does not belong to degree {spec.size}, level {level}")
    if not h.is_positive_definite():
        raise PreconditionError(f"h={h} is not positive definite")
    disc = discriminant_data(h, n)
    bracket = l_value_bracket(k, n, spec.chi, disc.rho, level)
    c1 = level_part(disc.conductor, level)
    n1 = bracket.gauss_unit_part.n1
    det_part = (
        cyclotomic_sqrt(n1 * c1)
        * Fraction(disc.square_part, (2 * level) ** n) ** (2 * k - 2 * n - 1)
        * Fraction(c1, n1) ** (k - n)
        / c1
    )
    f_polys, f_values = {}, {}
    value = det_part * bracket.value.value
    for ell in sorted(factorint(abs(h.det_two_level_h()))):
        if level % ell == 0:
            continue
        poly = pipeline_f_poly(h, ell, n, disc.rho).poly
        f_polys[ell] = poly
        f_values[ell] = poly(spec.chi(ell) * Fraction(1, ell ** k))
        value = value * f_values[ell]
    return CoefficientLedger(h, disc, det_part, bracket, f_polys, f_values, value)


def coefficient_b(h: HalfIntegralMatrix, spec: EisensteinSpec) -> PiScalar:
    """b(h) = det(h)^(k-n-1/2) L^N(k-n, chi rho_h) prod f_{h,l}(chi(l) l^-k), as a pi^(k-n) multiple."""
    return PiScalar(coefficient_ledger(h, spec).value, spec.k - spec.n)


def _normalized_task(spec: EisensteinSpec, rational: Fraction, h: HalfIntegralMatrix):
    ledger = coefficient_ledger(h, spec)
    return h, PiScalar(ledger.value * rational, 0), ledger


@dataclass
class NormalizedExpansion:
    spec: EisensteinSpec
    bound: int
    coefficients: dict[HalfIntegralMatrix, PiScalar]
    normalization: NormalizationRecord
    ledgers: dict[HalfIntegralMatrix, CoefficientLedger] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "bound": self.bound,
            "coeffs": [
                {"h": matrix_to_json(h), "value": cyclo_to_json(c.value), "pi_exp": c.pi_exponent}
                for h, c in self.coefficients.items()
            ],
            "normalization": self.normalization.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "NormalizedExpansion":
        coeffs = {
            matrix_from_json(row["h"]): PiScalar(cyclo_from_json(row["value"]), int(row["pi_exp"]))
            for row in data["coeffs"]
        }
        return cls(EisensteinSpec.from_json(data["spec"]), int(data["bound"]), coeffs,
                   NormalizationRecord.from_json(data["normalization"]))


def build_expansion(spec: EisensteinSpec, index_bound: int, workers: Optional[int] = None) -> NormalizedExpansion:
    """All coefficients with h positive definite and tr(N h) <= index_bound."""
    if spec.m0:
        raise PreconditionError("holomorphic expansion needs m0 = 0; raise the weight with the Maass operator")
    workers = workers if workers is not None else config.WORKERS
    record = normalization_record(spec)
    indices = list(enumerate_positive_indices(spec.size, spec.level, index_bound))
    logger.info("building E* expansion n=%s N=%s k=%s: %s indices", spec.n, spec.level, spec.k, len(indices))
    task = partial(_normalized_task, spec, record.rational)
    if workers > 1 and len(indices) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, indices))
    else:
        results = [task(h) for h in indices]
    coefficients, ledgers = {}, {}
    for h, value, ledger in results:
        if value.pi_exponent != 0:
            raise InternalInvariantError(f"coefficient at {h} carries pi^{value.pi_exponent}")
        coefficients[h] = value
        ledgers[h] = ledger
    return NormalizedExpansion(spec, index_bound, coefficients, record, ledgers)


# ---------- integrality ----------


OUTSIDE_HYPOTHESES = "outside theorem hypotheses"


@dataclass(frozen=True)
class CoefficientVerdict:
    h: HalfIntegralMatrix
    valuation: Optional[float]
    passed: Optional[bool]
    ledger: dict

    def to_json(self) -> dict:
        return {
            "h": matrix_to_json(self.h),
            "valuation": None if self.valuation is None else str(self.valuation),
            "passed": self.passed,
            "ledger": self.ledger,
        }


@dataclass(frozen=True)
class IntegralityReport:
    p: int
    label: str
    within_hypotheses: bool
    verdicts: list[CoefficientVerdict]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts if v.passed is not None)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "label": self.label,
            "within_hypotheses": self.within_hypotheses,
            "passed": self.passed,
            "verdicts": [v.to_json() for v in self.verdicts],
        }


def hypotheses_hold(p: int, k: int, level: int) -> bool:
    return (2 * level) % p != 0 and p >= 2 * k


def _ledger_valuations(ledger: CoefficientLedger, spec: EisensteinSpec, rational: Fraction, p: int) -> dict:
    out = {
        "rational": str(p_valuation(rational, p)),
        "det_part": str(p_valuation(ledger.det_part, p)),
        "bracket": str(p_valuation(ledger.bracket.value.value, p)),
        "bernoulli": str(p_valuation(ledger.bracket.bernoulli_part, p)),
    }
    if p in ledger.f_values:
        out["f_value"] = str(p_valuation(ledger.f_values[p], p))
    if p != 2 and spec.level % p and ledger.h.det_two_level_h() % p == 0:
        out["pkey_margin"] = str(check_key_valuation(ledger.h, p, spec.k, spec.n, spec.chi).margin)
    return out


def integrality_report(exp: NormalizedExpansion, p: int, ledger: bool = True) -> IntegralityReport:
    """p-adic valuation of every coefficient, with a factor-by-factor breakdown."""
    spec = exp.spec
    within = hypotheses_hold(p, spec.k, spec.level)
    label = "within theorem hypotheses" if within else OUTSIDE_HYPOTHESES
    verdicts = []
    for h, value in exp.coefficients.items():
        try:
            v = p_valuation(value.value, p)
        except ArithmeticDomainError as exc:
            verdicts.append(CoefficientVerdict(h, None, None, {"error": str(exc)}))
            continue
        breakdown = {}
        if ledger:
            try:
                led = exp.ledgers.get(h) or coefficient_ledger(h, spec)
                breakdown = _ledger_valuations(led, spec, exp.normalization.rational, p)
            except ArithmeticDomainError as exc:
                breakdown = {"error": str(exc)}
        passed = v >= 0 and value.pi_exponent == 0
        verdicts.append(CoefficientVerdict(h, v, passed, breakdown))
        if not passed:
            level = logging.WARNING if within else logging.INFO
            logger.log(level, "coefficient at %s has %s-adic valuation %s (%s)", h, p, v, label)
    report = IntegralityReport(p, label, within, verdicts)
    logger.info("integrality at p=%s: %s (%s)", p, "PASS" if report.passed else "FAIL", label)
    return report


# ---------- numerics ----------


def lambda_n_numeric(spec: EisensteinSpec) -> mpmath.mpc:
    """Lambda^N(k/2) = L^N(k, chi) prod_{i=1}^n L^N(2k-2i, chi^2)."""
    chi2 = spec.chi * spec.chi
    value = numeric_l_value(spec.chi, spec.k)
    for i in range(1, spec.n + 1):
        value *= numeric_l_value(chi2, 2 * spec.k - 2 * i)
    return value


def _as_complex_matrix(z: Sequence[Sequence]) -> list[list[mpmath.mpc]]:
    return [[mpmath.mpc(x) for x in row] for row in z]


def _trace_product(h: HalfIntegralMatrix, z) -> mpmath.mpc:
    size = h.size
    return mpmath.fsum(
        mpmath.mpf(h.entries[i][j].numerator) / h.entries[i][j].denominator * z[j][i]
        for i in range(size) for j in range(size)
    )


def eval_expansion_numeric(exp: NormalizedExpansion, z: Sequence[Sequence]) -> mpmath.mpc:
    """E*(Z) from the truncated expansion: sum a(h) e(tr hZ) / (pi^P Lambda^N(k/2))."""
    if not exp.coefficients:
        return mpmath.mpc(0)
    z = _as_complex_matrix(z)
    total = mpmath.mpc(0)
    for h, value in exp.coefficients.items():
        total += value.to_complex() * mpmath.exp(2j * mpmath.pi * _trace_product(h, z))
    scale = mpmath.pi ** exp.normalization.pi_exponent * lambda_n_numeric(exp.spec)
    return total / scale


# ---------- truncation ----------


@dataclass(frozen=True)
class TailBound:
    """Bound on the omitted terms of the Fourier sum at a point, relative to the largest retained term."""

    bound: int
    exponent: float
    growth: float
    lambda_min: float
    largest_term: float
    tail: float

    @property
    def relative(self) -> float:
        return self.tail / self.largest_term if self.largest_term else math.inf

    def to_json(self) -> dict:
        return {
            "bound": self.bound,
            "exponent": self.exponent,
            "growth": self.growth,
            "lambda_min": self.lambda_min,
            "largest_term": self.largest_term,
            "tail": self.tail,
            "relative": self.relative,
        }


def _index_count(size: int, t: int) -> int:
    # diagonal of N h sums to t; each 2 (N h)_ij lies in [-t, t]
    return math.comb(t + size - 1, size - 1) * (2 * t + 1) ** (size * (size - 1) // 2)


def _min_eigenvalue_of_imaginary_part(z: Sequence[Sequence]) -> mpmath.mpf:
    y = mpmath.matrix([[mpmath.im(x) for x in row] for row in _as_complex_matrix(z)])
    if any(abs(y[i, j] - y[j, i]) > 1e-12 for i in range(y.rows) for j in range(y.cols)):
        raise PreconditionError("Z must be symmetric")
    eigenvalues, _ = mpmath.eigsy(y)
    lam = min(eigenvalues[i] for i in range(y.rows))
    if lam <= 0:
        raise PreconditionError("Im Z must be positive definite")
    return lam


def _growth_exponent(spec: EisensteinSpec) -> float:
    # det h <= (tr h / 2n)^2n, and |a(h)| grows like det(h)^(k - n - 1/2)
    return float(spec.size * (spec.k - spec.n - Fraction(1, 2)))


def _fit_growth(exp: "NormalizedExpansion", z, exponent: float) -> tuple[mpmath.mpf, mpmath.mpf]:
    """Smallest A with |a(h)| <= A tr(N h)^e on the retained indices, and the largest retained term."""
    growth = mpmath.mpf(0)
    largest = mpmath.mpf(0)
    for h, value in exp.coefficients.items():
        size = abs(value.to_complex())
        t = sum(h.entries[i][i] for i in range(h.size)) * exp.spec.level
        growth = max(growth, size / mpmath.mpf(int(t)) ** exponent)
        largest = max(largest, size * abs(mpmath.exp(2j * mpmath.pi * _trace_product(h, z))))
    return growth, largest


def _model_tail(spec: EisensteinSpec, exponent: float, growth, lam, bound: int) -> mpmath.mpf:
    """sum_{t > bound} A t^e #{h : tr(N h) = t} exp(-2 pi lambda_min t / N)."""
    rate = 2 * mpmath.pi * lam / spec.level
    # the term ratio decreases in t towards exp(-rate)
    limit = (1 + mpmath.exp(-rate)) / 2

    def term(t: int) -> mpmath.mpf:
        return growth * mpmath.mpf(t) ** exponent * _index_count(spec.size, t) * mpmath.exp(-rate * t)

    total = mpmath.mpf(0)
    t = bound + 1
    current = term(t)
    while True:
        following = term(t + 1)
        total += current
        ratio = following / current if current else mpmath.mpf(0)
        if ratio <= limit:
            return total + following / (1 - ratio)
        t += 1
        current = following


def truncation_tail_bound(exp: "NormalizedExpansion", z: Sequence[Sequence]) -> TailBound:
    """Bound the terms with tr(N h) > exp.bound at Z.

    The growth constant A is fitted on the retained coefficients, so the bound
    is a model estimate rather than a proof.
    """
    if not exp.coefficients:
        raise PreconditionError(f"no retained coefficients below tr(N h) <= {exp.bound}")
    z = _as_complex_matrix(z)
    lam = _min_eigenvalue_of_imaginary_part(z)
    exponent = _growth_exponent(exp.spec)
    growth, largest = _fit_growth(exp, z, exponent)
    tail = _model_tail(exp.spec, exponent, growth, lam, exp.bound)
    return TailBound(exp.bound, exponent, float(growth), float(lam), float(largest), float(tail))


def default_index_bound(
    spec: EisensteinSpec,
    z: Sequence[Sequence],
    tolerance: float = 1e-6,
    pilot: Optional[int] = None,
    limit: int = 200,
) -> int:
    """Smallest B whose omitted terms at Z are below tolerance times the largest retained term.

    A is fitted on a pilot expansion of bound 2n + 4 unless given.
    """
    pilot = pilot if pilot is not None else spec.size + 4
    z = _as_complex_matrix(z)
    lam = _min_eigenvalue_of_imaginary_part(z)
    exponent = _growth_exponent(spec)
    growth, largest = _fit_growth(build_expansion(spec, pilot), z, exponent)
    if not largest:
        raise PreconditionError(f"pilot bound {pilot} retains no coefficients")
    for bound in range(pilot, limit + 1):
        if _model_tail(spec, exponent, growth, lam, bound) < tolerance * largest:
            logger.info("default truncation at Z: tr(N h) <= %s (lambda_min %.4g)", bound, float(lam))
            return bound
    raise PreconditionError(f"Im Z too small: no truncation up to tr(N h) <= {limit} meets {tolerance:g}")


def translate_term(spec: EisensteinSpec, z: Sequence[Sequence], c: Sequence[Sequence], d: Sequence[Sequence]) -> mpmath.mpc:
    """chi(det D) det(CZ + D)^-k for a single coprime symmetric pair."""
    cz_d = mpmath.matrix(_as_complex_matrix(c)) * mpmath.matrix(_as_complex_matrix(z)) + mpmath.matrix(
        _as_complex_matrix(d)
    )
    det_d = int(round(float(mpmath.re(mpmath.det(mpmath.matrix(_as_complex_matrix(d)))))))
    return spec.chi(det_d).to_complex() * mpmath.det(cz_d) ** (-spec.k)


@dataclass(frozen=True)
class DirectSeriesResult:
    value: mpmath.mpc
    tail_estimate: float
    height: int
    radius: int
    terms: int
    warning: Optional[str] = None


def _row_hnf(height: int, level: int):
    for d1 in range(1, height + 1):
        for d2 in range(1, height + 1):
            if math.gcd(d1 * d2, level) != 1:
                continue
            for x in range(d2):
                yield d1, x, d2


def _primitive(rows: list[list[int]]) -> bool:
    g = 0
    cols = list(zip(*rows))
    for i in range(len(cols)):
        for j in range(i + 1, len(cols)):
            g = math.gcd(g, cols[i][0] * cols[j][1] - cols[j][0] * cols[i][1])
            if g == 1:
                return True
    return g == 1


def direct_series_numeric(
    spec: EisensteinSpec,
    z: Sequence[Sequence],
    height: int,
    radius: int = 4,
    tolerance: float = 1e-4,
) -> DirectSeriesResult:
    """E*(Z) summed over coprime symmetric pairs of the iota translate, degree 2.

    Pairs are (N D sigma, D) with D in row Hermite normal form of height <= height,
    sigma in Sym(Q/Z) with D sigma integral, and translations T in N Sym(Z)
    with entries bounded by N * radius.
    """
    if spec.size != 2:
        raise PreconditionError("direct series implemented for degree 2 only")
    if spec.k < 2 * spec.n + 2:
        raise PreconditionError(f"k={spec.k} outside the absolute convergence range k >= {2 * spec.n + 2}")
    level, k = spec.level, spec.k
    z11, z12, z22 = complex(z[0][0]), complex(z[0][1]), complex(z[1][1])
    if abs(complex(z[1][0]) - z12) > 1e-12:
        raise PreconditionError("Z must be symmetric")
    shifts = range(-radius, radius + 1)
    total = 0j
    shell_t = 0.0
    shell_d = 0.0
    terms = 0
    for d1, x, d2 in _row_hnf(height, level):
        delta = d1 * d2
        weight = complex(spec.chi(delta).to_complex()) * delta ** (-k)
        d_sum = 0j
        for a in range(delta):
            for b in range(delta):
                for c in range(delta):
                    # D sigma * delta, sigma = [[a, b], [b, c]] / delta
                    m11, m12, m21, m22 = d1 * a + x * b, d1 * b + x * c, d2 * b, d2 * c
                    if m11 % delta or m12 % delta or m21 % delta or m22 % delta:
                        continue
                    cmat = [[level * m11 // delta, level * m12 // delta], [level * m21 // delta, level * m22 // delta]]
                    if not _primitive([cmat[0] + [d1, x], cmat[1] + [0, d2]]):
                        continue
                    s11, s12, s22 = level * a / delta - z11, level * b / delta - z12, level * c / delta - z22
                    for t1 in shifts:
                        u11 = s11 + level * t1
                        for t2 in shifts:
                            u12 = s12 + level * t2
                            sq = u12 * u12
                            for t3 in shifts:
                                term = (u11 * (s22 + level * t3) - sq) ** (-k)
                                d_sum += term
                                if max(abs(t1), abs(t2), abs(t3)) == radius:
                                    shell_t += abs(term * weight)
                                terms += 1
        total += weight * d_sum
        if max(d1, d2) == height:
            shell_d += abs(weight * d_sum)
    value = mpmath.mpc(total)
    tail = shell_t + shell_d
    warning = None
    if abs(value) and tail > tolerance * abs(value):
        warning = (f"height bound too small for target tolerance: tail {float(tail):.3e}"
                   f" vs |value| {float(abs(value)):.3e}")
        logger.warning(warning)
    return DirectSeriesResult(value, tail, height, radius, terms, warning)
