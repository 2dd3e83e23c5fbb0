from fractions import Fraction

import pytest

from src.characters import DirichletCharacter, kronecker_character
from src.eisenstein import EisensteinSpec, build_expansion
from src.errors import PreconditionError
from src.exactnum import PiScalar
from src.nearholo import NHExpansion, NHPoly, eisenstein_at_minus_m0
from src.pullback import (
    ITERATE_NOTE,
    archimedean_grid,
    archimedean_I_closed,
    archimedean_I_numeric,
    cusp_support_check,
    restrict_diagonal,
)
from src.quadforms import HalfIntegralMatrix

ODD4 = kronecker_character(-4)


def _const(value) -> NHPoly:
    return NHPoly.constant(2, PiScalar.of(value))


# ---------- restriction ----------


def test_restriction_sums_over_off_diagonal():
    coeffs = {HalfIntegralMatrix.binary(1, r, 1): _const(r + 10) for r in range(-1, 2)}
    f = NHExpansion(2, 6, 1, coeffs)
    pb = restrict_diagonal(f, keep_breakdown=True)
    assert pb.coefficients == {(1, 1): _const(30)}
    assert sorted(pb.breakdown[(1, 1)]) == [-1, 0, 1]


def test_restriction_drops_off_diagonal_w():
    s = HalfIntegralMatrix.diagonal(1, 2)
    poly = NHPoly(2, {(0, 0, 0): PiScalar.of(3), (0, 1, 0): PiScalar.of(5), (1, 0, 1): PiScalar.of(7)})
    pb = restrict_diagonal(NHExpansion(2, 8, 1, {s: poly}))
    assert pb.coefficients[(1, 2)] == NHPoly(2, {(0, 0, 0): PiScalar.of(3), (1, 0, 1): PiScalar.of(7)})


def test_restriction_drops_cancelled_coefficients():
    f = NHExpansion(2, 6, 1, {
        HalfIntegralMatrix.binary(1, 1, 1): _const(4),
        HalfIntegralMatrix.binary(1, -1, 1): _const(-4),
    })
    assert restrict_diagonal(f).coefficients == {}


def test_restriction_needs_degree_two():
    with pytest.raises(PreconditionError, match="degree 2"):
        restrict_diagonal(NHExpansion(1, 6, 1, {}))


def test_restriction_is_linear():
    a = {HalfIntegralMatrix.binary(1, 0, 2): _const(2), HalfIntegralMatrix.binary(2, 1, 1): _const(3)}
    b = {HalfIntegralMatrix.binary(1, 0, 2): _const(5), HalfIntegralMatrix.binary(1, 1, 2): _const(-1)}
    both = {s: a.get(s, NHPoly(2)) + b.get(s, NHPoly(2)) for s in set(a) | set(b)}
    pa = restrict_diagonal(NHExpansion(2, 6, 1, a)).coefficients
    pb = restrict_diagonal(NHExpansion(2, 6, 1, b)).coefficients
    psum = restrict_diagonal(NHExpansion(2, 6, 1, both)).coefficients
    for key in set(pa) | set(pb):
        assert psum[key] == pa.get(key, NHPoly(2)) + pb.get(key, NHPoly(2))


# ---------- cusp support ----------


def test_cusp_check_passes_on_eisenstein_pullback():
    exp = build_expansion(EisensteinSpec(1, 6, 4, DirichletCharacter.trivial(4)), 6)
    pb = restrict_diagonal(exp)
    assert pb.coefficients
    verdict = cusp_support_check(pb)
    assert verdict.passed
    assert verdict.note == ITERATE_NOTE
    assert pb.to_json(verdict.passed)["cuspidal"] is True


def test_cusp_check_passes_on_raised_pullback():
    nh = eisenstein_at_minus_m0(EisensteinSpec(1, 7, 4, ODD4, 1), 4)
    assert cusp_support_check(restrict_diagonal(nh)).passed


def test_cusp_check_reports_witness():
    f = NHExpansion(2, 6, 1, {
        HalfIntegralMatrix.diagonal(0, 1): _const(1),
        HalfIntegralMatrix.diagonal(1, 1): _const(2),
    })
    verdict = cusp_support_check(restrict_diagonal(f))
    assert not verdict.passed
    assert verdict.witnesses == [(0, 1)]
    assert verdict.to_json()["witnesses"] == [{"a": "0", "b": "1"}]


# ---------- archimedean integral ----------


def test_archimedean_base_case_vanishes():
    report = archimedean_I_numeric(3, 0, 1j)
    assert report.recursion_value is None
    assert report.residual < 1e-8


def test_archimedean_recursion_residual():
    report = archimedean_I_numeric(8, 2, 1j)
    assert report.residual < 1e-6
    assert abs(archimedean_I_numeric(8, 1, 1 + 2j).value) < 1e-6


def test_archimedean_grid_passes():
    reports = archimedean_grid()
    assert len(reports) == 3 * 3 * 2
    assert all(r.residual < 1e-6 for r in reports)
    assert set(reports[0].to_json()) == {"l", "m", "z", "abs", "residual"}


@pytest.mark.parametrize("ell, m", [(2, 1), (4, 2), (6, -1)])
def test_archimedean_divergent_range(ell, m):
    with pytest.raises(PreconditionError, match="diverges"):
        archimedean_I_numeric(ell, m, 1j)
    with pytest.raises(PreconditionError, match="diverges"):
        archimedean_I_closed(ell, m)


def test_archimedean_needs_non_real_point():
    with pytest.raises(PreconditionError, match="non-real"):
        archimedean_I_numeric(6, 1, 2.0)


def test_closed_reduction_chain():
    closed = archimedean_I_closed(10, 2)
    assert closed.chain == [Fraction(2, 7), Fraction(1, 6)]
    assert closed.base_ell == 6
    assert closed.value == 0
