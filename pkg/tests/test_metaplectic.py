import pytest

from ffcubic.lib.characters import omega_iso
from ffcubic.lib.cyclotomic import CycNum
from ffcubic.lib.ffpoly import Poly, enumerate_monic, field_spec
from ffcubic.lib.gauss import gauss_sum_structural, tau
from ffcubic.lib.utils import DegreeCapExceeded
from ffcubic.metaplectic import series
from ffcubic.metaplectic.identities import (
    hoffstein_sides,
    no_pole_check,
    no_pole_residual,
    psi_tilde_sides,
    verify_hecke_relations,
    verify_hoffstein_fe,
    verify_psi_tilde,
)
from ffcubic.metaplectic.residues import (
    b_bound,
    compare_main_term,
    explicit_residue_sides,
    gauss_average_main_term,
    patterson_sides,
    periodicity_sides,
    polynomial_p,
    psi_rationality_sides,
    residue_degree,
    rho,
)
from ffcubic.metaplectic.series import TruncatedSeries, coefficient_c, psi_series, psi_tilde


@pytest.fixture(scope="module")
def f7():
    return field_spec(7)


@pytest.fixture(scope="module")
def iso7(f7):
    return omega_iso(f7)


@pytest.fixture(autouse=True)
def degree_cap(monkeypatch):
    monkeypatch.setattr(series.config, "c_sum_max_degree", 6)


@pytest.fixture(scope="module")
def T(f7):
    return Poly.T(f7)


@pytest.fixture(scope="module")
def one(f7):
    return Poly.one(f7)


def test_truncated_series_arithmetic():
    geometric = TruncatedSeries.geometric(3, 6, 2, 3)
    assert geometric.coefficient(3) == 2
    assert geometric.coefficient(6) == 4
    assert geometric.coefficient(4) == 0
    inverse = TruncatedSeries.one(3, 6) - TruncatedSeries.monomial(3, 6, 3, 2)
    assert geometric * inverse == TruncatedSeries.one(3, 6)
    assert (geometric + 1).coefficient(0) == 2
    assert geometric.shift(2, 5).coefficient(5) == 10
    assert geometric.differences(TruncatedSeries.one(3, 6)) == [3, 6]


def test_small_c_sums(iso7, one):
    t = tau(iso7)
    assert coefficient_c(iso7, one, 0) == 1
    assert coefficient_c(iso7, one, 1) == t * 7
    assert coefficient_c(iso7, one, 2) == 0
    assert coefficient_c(iso7, one, 3) == 7**4 - 7**3
    assert coefficient_c(iso7, one, 4) == t * 7**4 * 6


def test_c_sum_against_direct_gauss_sums(iso7, T):
    for f in (T, T + 1, T**2):
        for d in (1, 2):
            direct = sum(
                (gauss_sum_structural(iso7, f, F) for F in enumerate_monic(iso7.field, d)),
                start=CycNum.zero(21),
            )
            assert coefficient_c(iso7, f, d) == direct, (f, d)


def test_c_sum_preconditions(iso7, f7, one):
    with pytest.raises(ValueError):
        coefficient_c(iso7, Poly(f7, (1, 2)), 1)
    with pytest.raises(ValueError):
        coefficient_c(iso7, one, -1)
    with pytest.raises(DegreeCapExceeded):
        coefficient_c(iso7, one, 7)


def test_c_sum_recurrence(iso7, T):
    f = T + 2
    B = b_bound(f, 0)
    assert coefficient_c(iso7, f, 3 * (B + 2)) == coefficient_c(iso7, f, 3 * (B + 1)) * 7**4


def test_polynomial_p_for_trivial_shift(iso7, one):
    t = tau(iso7)
    assert polynomial_p(iso7, one, 0) == [1]
    assert polynomial_p(iso7, one, 1) == [t * 7]
    assert polynomial_p(iso7, one, 2) == []
    with pytest.raises(ValueError):
        polynomial_p(iso7, one, 3)


def test_polynomial_p_degree_bound(iso7, T):
    for f in (T, T + 5, T**2 + 1, T * (T + 1), T**2):
        for i in range(3):
            assert len(polynomial_p(iso7, f, i)) - 1 <= b_bound(f, i)


def test_residues_of_trivial_shift(iso7, one):
    t = tau(iso7)
    assert rho(iso7, one, 0).value == 1
    assert rho(iso7, one, 1).value == t * 7
    assert rho(iso7, one, 2).value == 0
    assert rho(iso7, one, 3).value == 7**4
    assert rho(iso7, one, -2).value == t * 7 / 7**4


def test_residue_vanishes_on_squares(iso7, one, T):
    for i in range(3):
        assert rho(iso7, T**2, i).value == 0
        assert rho(iso7, (T + 1) ** 2, i).value == 0


def test_residue_json(iso7, one):
    record = rho(iso7, one, 1).to_json()
    assert set(record) == {"f", "i", "exact", "complex"}


@pytest.mark.parametrize("i", [0, 1, 2])
def test_explicit_residue(iso7, T, i):
    for f in (T, T + 1, T**2 + 1, T * (T + 1), T**2):
        lhs, rhs = explicit_residue_sides(iso7, f, i)
        assert lhs == rhs, (f, i)


def test_patterson_relation(iso7, one, T):
    assert rho(iso7, T, 0).value == 1
    for f, pi in ((one, T), (T + 1, T), (one, T**2 + 1)):
        for i in range(3):
            lhs, rhs = patterson_sides(iso7, f, pi, i)
            assert lhs == rhs, (f, pi, i)
    with pytest.raises(ValueError):
        patterson_sides(iso7, T, T, 0)


def test_periodicity(iso7, one, T):
    for pi in (T, T + 4):
        for i in (0, 2):
            high, low = periodicity_sides(iso7, one, pi, 0, i)
            assert high == low, (pi, i)


def test_periodicity_beyond_the_first_power(iso7, one, T, monkeypatch):
    monkeypatch.setattr(series.config, "c_sum_max_degree", 7)
    for i in (0, 1):
        high, low = periodicity_sides(iso7, one, T, 1, i)
        assert high == low, i


def test_explicit_residue_with_quadratic_prime(iso7, T):
    pi = T**2 + 1
    for f, i in ((pi * T, 0), (pi * T, 2), (pi**2, 0), (pi * (T + 1), 2)):
        lhs, rhs = explicit_residue_sides(iso7, f, i)
        assert lhs == rhs, (f, i)


def test_residue_degree(one, T):
    assert residue_degree(one, 0) == 3
    assert residue_degree(T**4, 1) == 7
    assert residue_degree(T**4, 2) == 8
    assert residue_degree((T**2 + 1) ** 3, 0) == 9


def test_periodicity_of_quadratic_prime_is_capped(iso7, one, T):
    with pytest.raises(DegreeCapExceeded):
        periodicity_sides(iso7, one, T**2 + 1, 0, 0)


@pytest.mark.parametrize("i", [0, 1, 2])
def test_psi_rationality(iso7, one, T, i):
    for f in (one, T):
        lhs, rhs = psi_rationality_sides(iso7, f, i, 6)
        assert lhs == rhs, (f, i)


def test_hecke_relations(iso7, one, T):
    assert verify_hecke_relations(iso7, one, T, 6)


def test_hecke_relations_shifted(iso7, T):
    assert verify_hecke_relations(iso7, T + 1, T, 4)


def test_hecke_relations_composite_shift(iso7, T):
    assert verify_hecke_relations(iso7, T * (T + 1), T + 2, 4)


def test_hecke_relations_reject_divisible_shift(iso7, T):
    with pytest.raises(ValueError):
        verify_hecke_relations(iso7, T, T, 3)


def test_hoffstein_trivial_shift(iso7, one):
    t = tau(iso7)
    lhs, rhs = hoffstein_sides(iso7, one, 0)
    assert set(lhs) == {0, 3}
    assert lhs[3] == 49 and lhs[0] == -1
    assert lhs == rhs
    lhs, rhs = hoffstein_sides(iso7, one, 1)
    assert lhs == {1: -t * 7, 4: t * 7**3}
    assert lhs == rhs


@pytest.mark.parametrize("i", [0, 1, 2])
def test_hoffstein_functional_equation(iso7, one, T, i):
    for f in (one, T, T + 3):
        assert verify_hoffstein_fe(iso7, f, i), (f, i)
        assert no_pole_check(iso7, f, i), (f, i)


def test_no_pole_residual():
    q = 7
    divisible = {3: CycNum.rational(3, 49), 0: CycNum.rational(3, -1)}
    assert no_pole_residual(divisible, q) == {}
    residual = no_pole_residual({3: CycNum.rational(3, 49)}, q)
    assert residual == {0: CycNum.rational(3, 1)}


def test_psi_tilde_of_trivial_shift(iso7, one):
    assert psi_tilde(iso7, one, 5).series == psi_series(iso7, one, 5).series


@pytest.mark.parametrize("power", [1, 2, 3])
def test_psi_tilde_expression(iso7, T, power):
    assert verify_psi_tilde(iso7, T**power, 6)


def test_psi_tilde_expression_mixed(iso7, T):
    direct, rebuilt = psi_tilde_sides(iso7, T**2 * (T + 1), 5)
    assert direct == rebuilt


def test_main_term_trivial_shift(iso7, one):
    for d in (3, 6):
        comparison = compare_main_term(iso7, one, d)
        assert comparison.main_term == comparison.exact_sum
        assert comparison.relative_error < 1e-9
    assert gauss_average_main_term(iso7, one, 3) == 7**4 - 7**3


def test_main_term_vanishes_without_cube_free_square(iso7, T):
    assert gauss_average_main_term(iso7, T**2, 4) == 0
    comparison = compare_main_term(iso7, T**2, 4)
    assert comparison.exact_sum == coefficient_c(iso7, T**2, 4, coprime=True)
    assert set(comparison.to_json()) == {
        "f",
        "d",
        "exact_sum",
        "main_term",
        "main_term_complex",
        "relative_error",
    }
