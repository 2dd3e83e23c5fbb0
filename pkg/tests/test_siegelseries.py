from fractions import Fraction

import pytest
from hypothesis import assume, given, reject, settings, strategies as st

from src.characters import DirichletCharacter, kronecker_character
from src.errors import BudgetExceeded, PreconditionError
from src.exactnum import CyclotomicNumber, UniPoly, rational_valuation
from src.quadforms import HalfIntegralMatrix, mat_mul, transpose
from src.siegelseries import (
    alpha_chi_p,
    binary_f_poly,
    brute_force_Bp,
    check_key_valuation,
    compare_oracles,
    enumerate_hnf_cosets,
    extract_f_poly,
    kitaoka_bp,
    kitaoka_polynomial,
    pipeline_f_poly,
)


def _x0(p, k, chi_at_p=1):
    return CyclotomicNumber._coerce(chi_at_p) * Fraction(1, p ** k)


@st.composite
def binary_indices(draw, p, max_det_valuation):
    a = draw(st.integers(1, 12))
    c = draw(st.integers(1, 12))
    b = draw(st.integers(-a, a))
    h = HalfIntegralMatrix.binary(a, b, c)
    assume(h.is_positive_definite())
    assume(rational_valuation(h.det_two_level_h(), p) <= max_det_valuation)
    return h


# ---------- cosets ----------


def test_only_identity_at_valuation_zero():
    cosets = list(enumerate_hnf_cosets(2, 5, 0))
    assert [c.matrix for c in cosets] == [((1, 0), (0, 1))]


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_cosets_of_valuation_one(p):
    exact = [c for c in enumerate_hnf_cosets(2, p, 1) if c.det_valuation == 1]
    assert len(exact) == p + 1
    assert ((p, 0), (0, 1)) in [c.matrix for c in exact]


def test_thirteen_cosets_of_valuation_two_at_three():
    exact = [c for c in enumerate_hnf_cosets(2, 3, 2) if c.det_valuation == 2]
    assert len(exact) == 13
    assert len({c.matrix for c in exact}) == 13


@pytest.mark.parametrize("p,v", [(2, 3), (3, 3), (5, 2)])
def test_coset_counts_follow_the_shape_sum(p, v):
    exact = [c for c in enumerate_hnf_cosets(2, p, v) if c.det_valuation == v]
    assert len(exact) == sum(p ** a for a in range(v + 1))


def test_cosets_come_in_valuation_order():
    vals = [c.det_valuation for c in enumerate_hnf_cosets(3, 2, 2)]
    assert vals == sorted(vals)


# ---------- alpha and Kitaoka ----------


def test_alpha_vanishes_off_the_integral_lattice():
    assert alpha_chi_p(((Fraction(1, 3), 0), (0, 1)), 4, 1, 3, 1) == 0


def test_alpha_of_the_zero_form():
    p = 5
    expected = (1 - Fraction(1, p ** 4)) * (1 + Fraction(1, p ** 2)) * (1 - Fraction(1, p ** 6))
    assert alpha_chi_p(((p, 0), (0, 2 * p)), 4, 1, p, 1) == expected


def test_alpha_of_an_anisotropic_plane():
    expected = (1 - Fraction(1, 3 ** 4)) * (1 - Fraction(1, 3 ** 3))
    assert alpha_chi_p(((1, 0), (0, 1)), 4, 1, 3, 1) == expected


def test_unimodular_index_uses_the_identity_coset_only():
    p, k = 5, 4
    h = HalfIntegralMatrix.diagonal(1, 1)
    # -I mod 5 is split: -1 is a square
    expected = (1 - Fraction(1, p ** k)) * (1 + Fraction(p, p ** k))
    assert kitaoka_bp(h, k, 1, p, 1) == expected


def test_kitaoka_with_a_quadratic_character_value():
    p, k = 3, 6
    h = HalfIntegralMatrix.diagonal(1, 3)
    chi_at_p = -1
    x0 = _x0(p, k, chi_at_p)
    assert kitaoka_bp(h, k, chi_at_p, p, 1) == (1 - x0) * (1 - 9 * x0 * x0)


def test_kitaoka_polynomial_of_diag_one_nine():
    b = kitaoka_polynomial(HalfIntegralMatrix.diagonal(1, 9), 3, 1)
    # (1 - X)(1 - 9X^2) + 27 X^2 (1 - X)(1 - 3X)
    expected = UniPoly.of([1, -1]) * (UniPoly.of([1, 0, -9]) + UniPoly.of([0, 0, 27]) * UniPoly.of([1, -3]))
    assert b == expected


def test_kitaoka_rejects_dyadic_primes():
    with pytest.raises(PreconditionError):
        kitaoka_polynomial(HalfIntegralMatrix.diagonal(1, 1), 2, 1)


@settings(deadline=None, max_examples=30)
@given(st.sampled_from([3, 5, 7]).flatmap(lambda p: st.tuples(st.just(p), binary_indices(p, 6))))
def test_remark_bound_never_trips(case):
    p, h = case
    kitaoka_polynomial(h, p, 1)


# ---------- brute force ----------


def test_brute_force_constant_term_and_unimodular_degree_one():
    p = 5
    h = HalfIntegralMatrix.diagonal(1, 1)
    brute = brute_force_Bp(h, p)
    assert brute.poly.coefficient(0) == 1
    # (1 - X)(1 + pX) at degree 1
    assert brute.poly.coefficient(1) == p - 1
    assert brute.poly == kitaoka_polynomial(h, p, 1)


def test_brute_force_matches_kitaoka_for_diag_one_three():
    p, k = 3, 6
    h = HalfIntegralMatrix.diagonal(1, 3)
    brute = brute_force_Bp(h, p)
    assert brute.truncation == 3
    for chi_at_p in (1, -1, CyclotomicNumber.zeta(4)):
        assert brute(_x0(p, k, chi_at_p)) == kitaoka_bp(h, k, chi_at_p, p, 1)


def test_brute_force_agrees_at_three_points():
    p = 3
    h = HalfIntegralMatrix.binary(1, 1, 1)
    brute = brute_force_Bp(h, p)
    kit = kitaoka_polynomial(h, p, 1)
    for x in (Fraction(1, 2), Fraction(-2, 7), Fraction(3)):
        assert brute(x) == kit(x)


def test_brute_force_is_stable_under_wider_truncation():
    brute = brute_force_Bp(HalfIntegralMatrix.diagonal(1, 1), 3)
    assert brute.truncation == 2
    assert brute.stabilized is True
    assert brute.poly == kitaoka_polynomial(HalfIntegralMatrix.diagonal(1, 1), 3, 1)


def test_recount_is_skipped_over_budget():
    # 3^6 fits, the m = 3 recount needs 3^9
    brute = brute_force_Bp(HalfIntegralMatrix.diagonal(1, 1), 3, cap=1000)
    assert brute.stabilized is None
    assert brute_force_Bp(HalfIntegralMatrix.diagonal(1, 1), 3, recheck=False).stabilized is None


def test_brute_force_budget():
    with pytest.raises(BudgetExceeded) as info:
        brute_force_Bp(HalfIntegralMatrix.diagonal(1, 1), 3, 4, cap=1000)
    assert info.value.cap == 1000
    assert info.value.needed == 3 ** 12


def test_brute_force_rejects_prime_dividing_level():
    with pytest.raises(PreconditionError):
        brute_force_Bp(HalfIntegralMatrix.binary(1, 0, 1, level=3), 3)


@pytest.mark.slow
@pytest.mark.parametrize("entries", [(1, 0, 9), (3, 0, 3), (2, 1, 5), (2, 1, 2)])
def test_brute_force_matches_kitaoka_polynomials_at_three(entries):
    h = HalfIntegralMatrix.binary(*entries)
    assert brute_force_Bp(h, 3).poly == kitaoka_polynomial(h, 3, 1)


@settings(deadline=None, max_examples=15)
@given(st.sampled_from([(3, 1), (5, 0), (7, 0)]).flatmap(lambda pv: st.tuples(st.just(pv[0]), binary_indices(*pv))),
       st.sampled_from([4, 6, 8]))
def test_oracle_equivalence_on_random_indices(case, k):
    p, h = case
    brute = brute_force_Bp(h, p)
    for chi_at_p in (1, -1):
        assert brute(_x0(p, k, chi_at_p)) == kitaoka_bp(h, k, chi_at_p, p, 1)


# ---------- f-polynomials ----------


def test_f_is_one_away_from_the_discriminant():
    f = extract_f_poly(HalfIntegralMatrix.diagonal(1, 1), 5, 1)
    assert f.poly == UniPoly.one()


def test_f_of_diag_one_three_is_trivial():
    f = extract_f_poly(HalfIntegralMatrix.diagonal(1, 3), 3, 1)
    assert f.poly == UniPoly.one()


def test_f_of_diag_one_nine():
    h = HalfIntegralMatrix.diagonal(1, 9)
    expected = UniPoly.of([1, 3, 27])
    assert extract_f_poly(h, 3, 1, method="kitaoka").poly == expected
    assert binary_f_poly(h, 3) == expected


def test_f_of_diag_three_three():
    h = HalfIntegralMatrix.diagonal(3, 3)
    assert extract_f_poly(h, 3, 1, method="kitaoka").poly == UniPoly.of([1, 12, 27])
    assert binary_f_poly(h, 3) == UniPoly.of([1, 12, 27])


def test_dyadic_f_from_brute_force_and_closed_form():
    h = HalfIntegralMatrix.diagonal(2, 2)
    f = extract_f_poly(h, 2, 1)
    assert f.poly == UniPoly.of([1, 4, 8])
    assert extract_f_poly(h, 2, 1, method="binary").poly == f.poly
    assert pipeline_f_poly(HalfIntegralMatrix.diagonal(1, 1), 2, 1).poly == UniPoly.one()


def test_pipeline_uses_brute_force_at_two():
    f = pipeline_f_poly(HalfIntegralMatrix.diagonal(2, 2), 2, 1)
    assert f.source == "brute_force"
    assert f.poly == UniPoly.of([1, 4, 8])
    assert pipeline_f_poly(HalfIntegralMatrix.diagonal(1, 9), 3, 1).source == "kitaoka"


@settings(deadline=None, max_examples=20)
@given(st.integers(1, 6), st.integers(-3, 3), st.integers(1, 6))
def test_dyadic_brute_force_matches_binary_closed_form(a, half_b, c):
    h = HalfIntegralMatrix.binary(a, 2 * half_b, c)
    assume(h.is_positive_definite())
    try:
        f = extract_f_poly(h, 2, 1, cap=2 ** 18)
    except BudgetExceeded:
        reject()
    assert f.poly == binary_f_poly(h, 2)


def test_f_evaluation_links_to_kitaoka():
    p, k = 3, 6
    h = HalfIntegralMatrix.diagonal(1, 9)
    rho = kronecker_character(-4)
    x0 = _x0(p, k)
    f_value = extract_f_poly(h, p, 1, method="kitaoka").poly(x0)
    cofactor = (1 - x0) * (1 - 9 * x0 * x0) / (1 - rho(p) * p * x0)
    assert f_value * cofactor == kitaoka_bp(h, k, 1, p, 1)


def test_unknown_method_is_rejected():
    with pytest.raises(PreconditionError):
        extract_f_poly(HalfIntegralMatrix.diagonal(1, 9), 3, 1, method="guess")


@settings(deadline=None, max_examples=30)
@given(st.sampled_from([3, 5, 7]).flatmap(lambda p: st.tuples(st.just(p), binary_indices(p, 5))))
def test_f_polynomials_are_integral_and_agree_with_the_closed_form(case):
    p, h = case
    f = extract_f_poly(h, p, 1, method="kitaoka")
    assert f.poly.is_integral()
    assert f.poly.coefficient(0) == 1
    assert f.poly == binary_f_poly(h, p)


# ---------- valuation bounds ----------


def test_key_valuation_for_diag_one_nine_is_tight():
    report = check_key_valuation(HalfIntegralMatrix.diagonal(1, 9), 3, 6, 1, DirichletCharacter.trivial(4))
    assert report.det_valuation == 2 and report.parity == 0
    assert report.f_valuation == -9
    assert report.margin == 0
    assert report.b_valuation == report.kit5_bound == -20
    assert report.first_identity_holds and report.passed


def test_key_valuation_preconditions():
    chi = DirichletCharacter.trivial(3)
    with pytest.raises(PreconditionError):
        check_key_valuation(HalfIntegralMatrix.diagonal(1, 9), 3, 6, 1, chi)


def test_key_valuation_is_vacuous_off_the_divisor_set():
    report = check_key_valuation(HalfIntegralMatrix.diagonal(1, 1), 5, 6, 1, DirichletCharacter.trivial(4))
    assert report.passed and report.vacuous
    assert report.det_valuation == 0
    assert report.to_json()["vacuous"] is True
    assert not check_key_valuation(HalfIntegralMatrix.diagonal(1, 9), 3, 6, 1, DirichletCharacter.trivial(4)).vacuous


@st.composite
def indices_divisible_at(draw, p):
    """Binary h with 1 <= v_p(det h) <= 3, conjugated by a random element of SL_2(Z)."""
    pv = p ** draw(st.integers(1, 3))
    if draw(st.booleans()):
        # det(2h) = pv * u = 3 mod 4
        u = 4 * draw(st.integers(0, 15)) + (3 * pv) % 4
        if u % p == 0:
            u += 4
        h0 = HalfIntegralMatrix.binary(1, 1, (pv * u + 1) // 4)
    else:
        u = draw(st.integers(1, 16))
        if u % p == 0:
            u += 1
        h0 = HalfIntegralMatrix.diagonal(1, pv * u)
    t = draw(st.integers(-2, 2))
    s = draw(st.integers(-2, 2))
    g = ((1, t), (s, 1 + s * t))
    return HalfIntegralMatrix(mat_mul(transpose(g), mat_mul(h0.entries, g)))


@settings(deadline=None, max_examples=100)
@given(st.sampled_from([3, 5, 7]).flatmap(lambda p: st.tuples(st.just(p), indices_divisible_at(p))),
       st.integers(4, 10),
       st.sampled_from(["trivial", "kron"]))
def test_key_valuation_inequality_holds(case, k, chi_kind):
    p, h = case
    chi = DirichletCharacter.trivial(4) if chi_kind == "trivial" else kronecker_character(-4)
    report = check_key_valuation(h, p, k, 1, chi)
    assert 1 <= report.det_valuation <= 3
    assert not report.vacuous
    assert report.passed, report.to_json()


def test_compare_oracles_record():
    record = compare_oracles(HalfIntegralMatrix.diagonal(1, 3), 3, 6, DirichletCharacter.trivial(4))
    assert record["equal"] is True
    assert record["f_poly"] == ["1"]
    assert record["pkey_margin"] is not None
    assert set(record) >= {"h", "p", "k", "kitaoka", "brute_force", "equal", "pkey_margin"}
