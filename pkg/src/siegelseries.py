"""Local Siegel series B_p(X, h): Kitaoka's coset formula, a brute-force oracle, and f-polynomials."""
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

from . import config
from .characters import DirichletCharacter
from .errors import ArithmeticDomainError, BudgetExceeded, FactorizationError, InternalInvariantError, PreconditionError
from .exactnum import (
    CyclotomicNumber,
    UniPoly,
    cyclo_to_json,
    p_valuation,
    poly_div_exact,
    rational_valuation,
)
from .quadforms import (
    HalfIntegralMatrix,
    Rows,
    as_rows,
    classify_mod_p,
    discriminant_data,
    mat_mul,
    matrix_to_json,
    smith_valuations,
    transpose,
)

logger = logging.getLogger(__name__)


# ---------- cosets ----------


@dataclass(frozen=True)
class HNFCoset:
    matrix: tuple[tuple[int, ...], ...]
    det_valuation: int


def enumerate_hnf_cosets(size: int, p: int, max_det_valuation: int) -> Iterator[HNFCoset]:
    """One upper-triangular representative per coset GL(Z_p)\\G with v_p(det G) <= max_det_valuation.

    Diagonal entries are p^a_i; the entries above the diagonal in column j run
    over [0, p^a_j). Ordered by det valuation, then shape, then entries.
    """
    if max_det_valuation < 0:
        raise PreconditionError("max_det_valuation must be nonnegative")
    slots = [(i, j) for i in range(size) for j in range(i + 1, size)]
    for v in range(max_det_valuation + 1):
        for shape in itertools.product(range(v + 1), repeat=size):
            if sum(shape) != v:
                continue
            ranges = [range(p ** shape[j]) for _, j in slots]
            for values in itertools.product(*ranges):
                g = [[0] * size for _ in range(size)]
                for i in range(size):
                    g[i][i] = p ** shape[i]
                for (i, j), x in zip(slots, values):
                    g[i][j] = x
                yield HNFCoset(tuple(tuple(row) for row in g), v)


def upper_inverse(g: tuple[tuple[int, ...], ...]) -> Rows:
    size = len(g)
    inv = [[Fraction(0)] * size for _ in range(size)]
    for j in range(size):
        inv[j][j] = Fraction(1, g[j][j])
        for i in range(j - 1, -1, -1):
            acc = sum((g[i][t] * inv[t][j] for t in range(i + 1, j + 1)), Fraction(0))
            inv[i][j] = -acc / g[i][i]
    return tuple(tuple(row) for row in inv)


def is_p_integral(s: Rows, p: int) -> bool:
    return all(x.denominator % p for row in s for x in row)


# ---------- Kitaoka's closed form ----------


def alpha_polynomial(s: Rows, p: int, n: int) -> UniPoly:
    """alpha(S) as a polynomial in X = chi(p) p^-k; zero when S is not p-integral."""
    if not is_p_integral(s, p):
        return UniPoly(())
    cls = classify_mod_p(s, p)
    d = cls.rank
    poly = UniPoly.of([1, -1])
    if d % 2 == 0:
        top = 2 * n - d // 2
        poly = poly * UniPoly.of([1, cls.epsilon * p ** top])
        extra = top - 1
    else:
        extra = 2 * n - (d + 1) // 2
    for i in range(1, extra + 1):
        poly = poly * UniPoly.of([1, 0, -p ** (2 * i)])
    return poly


def alpha_chi_p(s, k: int, chi_at_p, p: int, n: int) -> CyclotomicNumber:
    if p == 2:
        raise PreconditionError("dyadic classification out of scope")
    x0 = CyclotomicNumber._coerce(chi_at_p) * Fraction(1, p ** k)
    return alpha_polynomial(as_rows(s), p, n)(x0)


def kitaoka_polynomial(h: HalfIntegralMatrix, p: int, n: int) -> UniPoly:
    """B_p(X, h) = sum over cosets of p^(v(2n+1)) X^(2v) alpha(-G^-T h G^-1)."""
    if p == 2:
        raise PreconditionError("dyadic classification out of scope")
    det = h.det()
    if det == 0:
        raise PreconditionError("singular h")
    v_det = rational_valuation(det, p)
    total = UniPoly(())
    terms = 0
    for coset in enumerate_hnf_cosets(h.size, p, v_det // 2):
        g_inv = upper_inverse(coset.matrix)
        s = tuple(tuple(-x for x in row) for row in mat_mul(mat_mul(transpose(g_inv), h.entries), g_inv))
        if not is_p_integral(s, p):
            continue
        d = classify_mod_p(s, p).rank
        if coset.det_valuation > math.floor(Fraction(v_det, 2) - n + Fraction(d, 2)):
            raise InternalInvariantError(
                f"coset {coset.matrix} violates v_p(det G) <= floor(v_p(det h)/2 - n + d/2) (d={d})"
            )
        v = coset.det_valuation
        weight = UniPoly.of([0] * (2 * v) + [p ** (v * (2 * n + 1))])
        total = total + weight * alpha_polynomial(s, p, n)
        terms += 1
    logger.debug("kitaoka p=%s h=%s: %s contributing cosets", p, h, terms)
    return total


def kitaoka_bp(h: HalfIntegralMatrix, k: int, chi_at_p, p: int, n: int) -> CyclotomicNumber:
    """b_p = B_p(chi(p) p^-k, h)."""
    x0 = CyclotomicNumber._coerce(chi_at_p) * Fraction(1, p ** k)
    return kitaoka_polynomial(h, p, n)(x0)


# ---------- brute force ----------


@dataclass(frozen=True)
class SiegelSeriesPoly:
    poly: UniPoly
    p: int
    h: HalfIntegralMatrix
    source: str
    truncation: Optional[int] = None  # coefficients above this degree were not computed
    stabilized: Optional[bool] = None  # None when the m + 1 recount was over budget or not asked for

    def __call__(self, x) -> CyclotomicNumber:
        return self.poly(x)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "h": matrix_to_json(self.h),
            "source": self.source,
            "truncation": self.truncation,
            "coefficients": [cyclo_to_json(c) for c in self.poly.coefficients],
        }


def default_truncation(h: HalfIntegralMatrix, p: int, n: int) -> int:
    """deg B_p(X, h) = 1 + 2n - [rho(p) != 0] + 2 v_p(f)."""
    data = discriminant_data(h, n)
    rho_nonzero = data.fundamental_discriminant % p != 0
    return 1 + 2 * n - int(rho_nonzero) + 2 * int(rational_valuation(data.square_part, p))


def _phase_weights(h: HalfIntegralMatrix, modulus: int) -> list[tuple[int, int, int]]:
    def res(x: Fraction) -> int:
        return x.numerator * pow(x.denominator, -1, modulus) % modulus

    out = []
    for i in range(h.size):
        for j in range(i, h.size):
            t = h.entries[i][j] if i == j else 2 * h.entries[i][j]
            out.append((i, j, res(t)))
    return out


def _valuation_table(p: int, m: int) -> list[int]:
    mod = p ** m
    table = [m] * mod
    for x in range(1, mod):
        table[x] = _int_valuation(x, p, m)
    return table


def _int_valuation(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


def _brute_force_counts(h: HalfIntegralMatrix, p: int, m: int) -> list[dict[int, int]]:
    mod = p ** m
    weights = _phase_weights(h, mod)
    counts: list[dict[int, int]] = [dict() for _ in range(h.size * m + 1)]
    if h.size == 2:
        val = _valuation_table(p, m)
        t11, t12, t22 = (w for _, _, w in weights)
        for a in range(mod):
            for c in range(mod):
                base = (t11 * a + t22 * c) % mod
                vac = min(val[a], val[c])
                for b in range(mod):
                    v1 = min(vac, val[b])
                    if v1 >= m:
                        e = 0
                    else:
                        v2 = min(_int_valuation(a * c - b * b, p, 2 * m) - v1, m)
                        e = 2 * m - v1 - v2
                    phase = (base + t12 * b) % mod
                    bucket = counts[e]
                    bucket[phase] = bucket.get(phase, 0) + 1
        return counts
    slots = [(i, j) for i in range(h.size) for j in range(i, h.size)]
    for values in itertools.product(range(mod), repeat=len(slots)):
        a = [[0] * h.size for _ in range(h.size)]
        phase = 0
        for (i, j), x, (_, _, w) in zip(slots, values, weights):
            a[i][j] = a[j][i] = x
            phase += w * x
        e = sum(m - min(v, m) for v in smith_valuations(a, p))
        bucket = counts[int(e)]
        bucket[phase % mod] = bucket.get(phase % mod, 0) + 1
    return counts


def brute_force_Bp(
    h: HalfIntegralMatrix,
    p: int,
    max_x_degree: Optional[int] = None,
    *,
    n: Optional[int] = None,
    cap: Optional[int] = None,
    recheck: bool = True,
) -> SiegelSeriesPoly:
    """Coefficients of B_p(X, h) up to X^max_x_degree from the defining sum over Sym(Q_p)/Sym(Z_p).

    R runs over symmetric matrices with entries in p^-m Z / Z, m = max_x_degree;
    every R with e(R) <= m is of that shape, so those coefficients are exact.
    With recheck, the sum is recounted at m + 1 and the shared coefficients must agree;
    the recount is skipped when it would exceed the budget.
    """
    if math.gcd(p, h.level) != 1:
        raise PreconditionError(f"p={p} divides the level {h.level}")
    n = n if n is not None else h.size // 2
    m = max_x_degree if max_x_degree is not None else default_truncation(h, p, n)
    cap = cap if cap is not None else config.BRUTE_FORCE_CAP
    if m < 0:
        raise PreconditionError("max_x_degree must be nonnegative")
    entries = h.size * (h.size + 1) // 2
    needed = p ** (m * entries)
    if needed > cap:
        raise BudgetExceeded(needed, cap)
    logger.debug("brute force B_%s for %s at m=%s: %s terms", p, h, m, needed)
    counts = _brute_force_counts(h, p, m)
    coeffs = []
    for j in range(m + 1):
        value = CyclotomicNumber.from_powers(p ** m, counts[j]) if counts[j] else CyclotomicNumber.rational(0)
        if not value.is_rational() or value.as_rational().denominator != 1:
            raise InternalInvariantError(f"coefficient of X^{j} is not a rational integer: {value}")
        coeffs.append(CyclotomicNumber.rational(value.as_rational()))
    poly = UniPoly(tuple(coeffs))
    if poly.coefficient(0) != 1:
        raise InternalInvariantError(f"constant term of B_{p} is {poly.coefficient(0)}, expected 1")
    stabilized = None
    if recheck:
        if p ** ((m + 1) * entries) > cap:
            logger.debug("skipping the m=%s recount of B_%s for %s: over budget %s", m + 1, p, h, cap)
        else:
            wider = brute_force_Bp(h, p, m + 1, n=n, cap=cap, recheck=False)
            for j in range(m + 1):
                if wider.poly.coefficient(j) != poly.coefficient(j):
                    raise InternalInvariantError(f"coefficient of X^{j} moved between truncations {m} and {m + 1}")
            stabilized = True
    return SiegelSeriesPoly(poly, p, h, "brute_force", m, stabilized)


# ---------- f-polynomials ----------


def binary_f_poly(h: HalfIntegralMatrix, p: int) -> UniPoly:
    """Closed form of f_{h,p} for a binary h; valid at every p including 2."""
    if h.size != 2:
        raise PreconditionError("binary closed form needs a 2x2 index")
    two = h.two_level_h()
    a_, b_, c_ = two[0][0] // 2, two[0][1], two[1][1] // 2
    content = rational_valuation(math.gcd(a_, b_, c_), p)
    data = discriminant_data(h, 1)
    depth = int(rational_valuation(data.square_part, p))
    chi_p = data.rho(p)

    def geometric(length: int) -> UniPoly:
        # sum_{j < length} (p^3 X^2)^j
        coeffs = [0] * max(0, 2 * length - 1)
        for j in range(length):
            coeffs[2 * j] = p ** (3 * j)
        return UniPoly.of(coeffs)

    total = UniPoly(())
    for i in range(int(content) + 1):
        inner = geometric(depth - i + 1) - UniPoly.of([0, p]) * chi_p * geometric(depth - i)
        total = total + UniPoly.of([0] * i + [p ** (2 * i)]) * inner
    return total


def euler_cofactor(ell: int, n: int, rho_at_ell) -> tuple[UniPoly, UniPoly]:
    """(1 - rho(l) l^n X) and (1 - X) prod_{i=1}^n (1 - l^2i X^2)."""
    num = UniPoly.of([1]) - UniPoly.of([0, ell ** n]) * CyclotomicNumber._coerce(rho_at_ell)
    den = UniPoly.of([1, -1])
    for i in range(1, n + 1):
        den = den * UniPoly.of([1, 0, -ell ** (2 * i)])
    return num, den


def extract_f_poly(
    h: HalfIntegralMatrix,
    ell: int,
    n: int,
    *,
    rho: Optional[DirichletCharacter] = None,
    method: str = "brute_force",
    cap: Optional[int] = None,
) -> SiegelSeriesPoly:
    """f_{h,l}(X) = B_l(X, h) (1 - rho(l) l^n X) / [(1 - X) prod (1 - l^2i X^2)], an integer polynomial."""
    if math.gcd(ell, h.level) != 1:
        raise PreconditionError(f"prime {ell} divides the level {h.level}")
    if h.det_two_level_h() % ell:
        return SiegelSeriesPoly(UniPoly.one(), ell, h, "trivial")
    if rho is None:
        rho = discriminant_data(h, n).rho
    if method == "binary":
        if n != 1:
            raise PreconditionError("binary closed form needs n = 1")
        poly = binary_f_poly(h, ell)
    else:
        if method == "kitaoka":
            b_poly = kitaoka_polynomial(h, ell, n)
        elif method == "brute_force":
            b_poly = brute_force_Bp(h, ell, n=n, cap=cap).poly
        else:
            raise PreconditionError(f"unknown f-polynomial method {method!r}")
        num, den = euler_cofactor(ell, n, rho(ell))
        try:
            poly = poly_div_exact(b_poly * num, den)
        except ArithmeticDomainError as exc:
            raise FactorizationError(f"factorization of B_p violated at p={ell} for h={h}: {exc}") from exc
    if not poly.is_integral() or poly.coefficient(0) != 1:
        raise FactorizationError(f"factorization of B_p violated at p={ell} for h={h}: f = {poly}")
    return SiegelSeriesPoly(poly, ell, h, method)


def pipeline_f_poly(h: HalfIntegralMatrix, ell: int, n: int, rho: Optional[DirichletCharacter] = None) -> SiegelSeriesPoly:
    """The method the coefficient assembly uses: Kitaoka at odd primes, brute force at 2.

    For binary h the dyadic result is compared with the closed form.
    """
    if ell != 2:
        return extract_f_poly(h, ell, n, rho=rho, method="kitaoka")
    f = extract_f_poly(h, ell, n, rho=rho, method="brute_force")
    if h.size == 2 and f.source == "brute_force" and f.poly != binary_f_poly(h, ell):
        raise FactorizationError(f"dyadic f-polynomial of {h} disagrees with the binary closed form: {f.poly}")
    return f


# ---------- valuation bounds ----------


@dataclass(frozen=True)
class KeyValuationReport:
    h: HalfIntegralMatrix
    p: int
    k: int
    n: int
    det_valuation: int
    parity: int  # 0 if v_p(det h) is even, 1 if odd
    f_valuation: float
    b_valuation: float
    margin: Fraction
    kit5_bound: Fraction
    first_identity_holds: bool
    passed: bool
    vacuous: bool = False  # p does not divide det(h), so h is not in C
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "h": matrix_to_json(self.h),
            "p": self.p,
            "k": self.k,
            "n": self.n,
            "det_valuation": self.det_valuation,
            "parity": self.parity,
            "f_valuation": str(self.f_valuation),
            "b_valuation": str(self.b_valuation),
            "margin": str(self.margin),
            "kit5_bound": str(self.kit5_bound),
            "first_identity_holds": self.first_identity_holds,
            "passed": self.passed,
            "vacuous": self.vacuous,
        }


def check_key_valuation(h: HalfIntegralMatrix, p: int, k: int, n: int, chi: DirichletCharacter) -> KeyValuationReport:
    """(k - n - 1/2)(v_p(det h) - e) + v_p(f_{h,p}(chi(p) p^-k)) >= 0, with the intermediate bounds."""
    if p == 2 or chi.modulus % p == 0:
        raise PreconditionError(f"p={p} must be odd and prime to the level {chi.modulus}")
    if h.det() == 0:
        raise PreconditionError("singular h")
    v_det = int(rational_valuation(h.det(), p))
    if v_det == 0:
        zero = Fraction(0)
        return KeyValuationReport(h, p, k, n, 0, 0, 0, 0, zero, zero, True, True, vacuous=True,
                                  notes=[f"p={p} does not divide det(h): h is not in C"])
    parity = v_det % 2
    x0 = chi(p) * Fraction(1, p ** k)
    f_poly = extract_f_poly(h, p, n, method="kitaoka")
    f_val = p_valuation(f_poly(x0), p)
    b_val = p_valuation(kitaoka_bp(h, k, chi(p), p, n), p)
    margin = (k - n - Fraction(1, 2)) * (v_det - parity) + f_val
    kit5 = (v_det - parity) * (n - k + Fraction(1, 2)) + n * (n - 2 * k) + parity * (n - k)
    first = f_val == b_val + 2 * n * k - n * n + parity * (k - n)
    passed = margin >= 0 and b_val >= kit5 and first
    report = KeyValuationReport(h, p, k, n, v_det, parity, f_val, b_val, margin, kit5, first, passed)
    if not passed:
        logger.warning("valuation bound failed for h=%s p=%s k=%s: margin %s", h, p, k, margin)
    return report


def compare_oracles(h: HalfIntegralMatrix, p: int, k: int, chi: DirichletCharacter, n: int = 1,
                    cap: Optional[int] = None) -> dict:
    """Kitaoka vs brute force at X = chi(p) p^-k, plus f-extraction and the valuation margin."""
    x0 = chi(p) * Fraction(1, p ** k)
    kitaoka = kitaoka_bp(h, k, chi(p), p, n)
    brute = brute_force_Bp(h, p, n=n, cap=cap)
    brute_value = brute(x0)
    record = {
        "h": matrix_to_json(h),
        "p": p,
        "k": k,
        "kitaoka": cyclo_to_json(kitaoka),
        "brute_force": cyclo_to_json(brute_value),
        "equal": kitaoka == brute_value,
        "pkey_margin": None,
    }
    f_poly = extract_f_poly(h, p, n, method="brute_force", cap=cap)
    record["f_poly"] = [str(c.as_rational()) for c in f_poly.poly.coefficients]
    if h.det_two_level_h() % p == 0:
        record["pkey_margin"] = str(check_key_valuation(h, p, k, n, chi).margin)
    if not record["equal"]:
        logger.warning("oracle mismatch for h=%s p=%s k=%s", h, p, k)
    return record
