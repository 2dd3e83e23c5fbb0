"""Diagonal restriction to H_1 x H_1, the cusp-support check, and the archimedean integral I(l, m)."""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import mpmath

from .eisenstein import NormalizedExpansion
from .errors import PreconditionError
from .nearholo import NHExpansion, NHPoly, from_holomorphic, w_pairs

logger = logging.getLogger(__name__)

ITERATE_NOTE = (
    "support check on the iota translate; translates by other elements of Sp(Z^) are not recomputed"
)


# ---------- restriction ----------


@dataclass
class PullbackExpansion:
    """sum c(a, b) q1^a q2^b with c(a, b) = sum_r coefficient of [[a, r/2], [r/2, b]]."""

    level: int
    weight: int
    coefficients: dict[tuple[Fraction, Fraction], NHPoly]
    breakdown: dict[tuple[Fraction, Fraction], dict[Fraction, NHPoly]] = field(default_factory=dict, repr=False)

    def to_json(self, cuspidal: Optional[bool] = None) -> dict:
        return {
            "level": self.level,
            "weight": self.weight,
            "coeffs": [
                {"a": str(a), "b": str(b), "value": poly.to_json()}
                for (a, b), poly in sorted(self.coefficients.items())
            ],
            "cuspidal": cuspidal,
        }


def restrict_diagonal(
    exp: Union[NHExpansion, NormalizedExpansion], keep_breakdown: bool = False
) -> PullbackExpansion:
    """Restrict a degree-2 expansion to diag(z1, z2); W_12 is set to zero."""
    if isinstance(exp, NormalizedExpansion):
        exp = from_holomorphic(exp)
    if exp.degree != 2:
        raise PreconditionError(f"diagonal restriction implemented for degree 2, got {exp.degree}")
    off_diagonal = [idx for idx, (a, b) in enumerate(w_pairs(2)) if a != b]
    coeffs: dict[tuple[Fraction, Fraction], NHPoly] = {}
    breakdown: dict[tuple[Fraction, Fraction], dict[Fraction, NHPoly]] = {}
    for s, poly in exp.coefficients.items():
        key = (s.entries[0][0], s.entries[1][1])
        r = 2 * s.entries[0][1]
        part = poly.specialize_zero(off_diagonal)
        coeffs[key] = coeffs[key] + part if key in coeffs else part
        if keep_breakdown:
            breakdown.setdefault(key, {})[r] = part
            logger.debug("pullback (%s, %s) r=%s: %s terms", key[0], key[1], r, len(part.terms))
    coeffs = {key: poly for key, poly in coeffs.items() if not poly.is_zero()}
    return PullbackExpansion(exp.level, exp.weight, coeffs, breakdown)


@dataclass(frozen=True)
class CuspVerdict:
    passed: bool
    witnesses: list[tuple[Fraction, Fraction]]
    note: str = ITERATE_NOTE

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "witnesses": [{"a": str(a), "b": str(b)} for a, b in self.witnesses],
            "note": self.note,
        }


def cusp_support_check(pb: PullbackExpansion) -> CuspVerdict:
    """PASS iff c(a, b) vanishes whenever a = 0 or b = 0."""
    witnesses = sorted(key for key, poly in pb.coefficients.items() if (key[0] == 0 or key[1] == 0) and not poly.is_zero())
    if witnesses:
        logger.warning("pullback has constant-term support at %s", [f"({a}, {b})" for a, b in witnesses])
    return CuspVerdict(not witnesses, witnesses)


# ---------- archimedean integral ----------


@dataclass(frozen=True)
class ArchimedeanReport:
    ell: int
    m: int
    z: complex
    value: mpmath.mpc
    recursion_value: Optional[mpmath.mpc]
    residual: float

    def to_json(self) -> dict:
        return {
            "l": self.ell,
            "m": self.m,
            "z": [float(self.z.real), float(self.z.imag)],
            "abs": float(abs(self.value)),
            "residual": float(self.residual),
        }


def _check_range(ell: int, m: int) -> None:
    if m < 0 or 2 * m - ell >= -1:
        raise PreconditionError(f"I({ell},{m}) diverges: need m >= 0 and 2m - l < -1")


def _quad_I(ell: int, m: int, z: mpmath.mpc) -> mpmath.mpc:
    zbar = mpmath.conj(z)
    x0 = mpmath.re(z)
    return mpmath.quad(lambda x: (x + z) ** (m - ell) * (x + zbar) ** m, [-mpmath.inf, x0, mpmath.inf])


def archimedean_I_numeric(ell: int, m: int, z) -> ArchimedeanReport:
    """Quadrature of I(l, m) = int (x + z)^(m-l) (x + conj z)^m dx over the real line.

    Also reports |I(l, m) - m/(l-m-1) I(l-2, m-1)|; for m = 0 that is |I(l, 0)|.
    """
    _check_range(ell, m)
    z = mpmath.mpc(z)
    if mpmath.im(z) == 0:
        raise PreconditionError("z must be non-real")
    value = _quad_I(ell, m, z)
    if m == 0:
        recursion_value, residual = None, abs(value)
    else:
        recursion_value = mpmath.mpf(m) / (ell - m - 1) * _quad_I(ell - 2, m - 1, z)
        residual = abs(value - recursion_value)
    return ArchimedeanReport(ell, m, complex(z), value, recursion_value, float(residual))


@dataclass(frozen=True)
class ClosedReduction:
    ell: int
    m: int
    chain: list[Fraction]  # m/(l-m-1), (m-1)/(l-m-2) ... down to m = 0
    base_ell: int
    value: Fraction


def archimedean_I_closed(ell: int, m: int, z=None) -> ClosedReduction:
    """I(l, m) = prod(chain) * I(l - 2m, 0), and I(j, 0) = 0 for j >= 2."""
    _check_range(ell, m)
    if z is not None and complex(z).imag == 0:
        raise PreconditionError("z must be non-real")
    chain = []
    current_l, current_m = ell, m
    while current_m > 0:
        chain.append(Fraction(current_m, current_l - current_m - 1))
        current_l, current_m = current_l - 2, current_m - 1
    return ClosedReduction(ell, m, chain, current_l, Fraction(0))


def archimedean_grid(ells=(6, 8, 10), ms=(0, 1, 2), points=(1j, 1 + 2j)) -> list[ArchimedeanReport]:
    reports = []
    for ell in ells:
        for m in ms:
            if 2 * m - ell >= -1:
                continue
            for z in points:
                reports.append(archimedean_I_numeric(ell, m, z))
    return reports
