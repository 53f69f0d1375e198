import itertools

import pytest

from ffcubic.lib.characters import KUMMER, enumerate_characters, omega_iso
from ffcubic.lib.ffpoly import Poly, enumerate_monic, field_spec
from ffcubic.lib.gauss import (
    full_gauss_sum,
    full_gauss_sum_factored,
    gauss_sum_definitional,
    gauss_sum_structural,
    jacobi_sum,
    kummer_root_number,
    local_gauss_sum,
    no_oscillation_check,
    poisson_check,
    poisson_sides,
    root_number,
    root_number_from_coefficient,
    root_number_from_gauss_sum,
    signature_table,
    tau,
)


@pytest.fixture(scope="module")
def f7():
    return field_spec(7)


@pytest.fixture(scope="module")
def iso7(f7):
    return omega_iso(f7)


def _monic_up_to(field, d):
    for n in range(d + 1):
        yield from enumerate_monic(field, n)


def test_tau_identities(iso7):
    t = tau(iso7)
    assert t * t.conj() == 7
    assert t**3 == jacobi_sum(iso7).raise_order(21) * 7
    assert jacobi_sum(iso7) * jacobi_sum(iso7).conj() == 7
    assert tau(iso7, 0) == -1


def test_gauss_sum_of_constant_modulus(f7, iso7):
    assert gauss_sum_definitional(iso7, Poly.T(f7), Poly.one(f7)) == 1


def test_gauss_sum_needs_monic_modulus(f7, iso7):
    with pytest.raises(ValueError):
        gauss_sum_definitional(iso7, Poly.one(f7), Poly(f7, (1, 2)))


def test_structural_matches_definitional(f7, iso7):
    T = Poly.T(f7)
    shifts = [Poly(f7), Poly.one(f7), T, T + 3, T * 2, T * T + 1]
    moduli = list(_monic_up_to(f7, 2)) + [T**3, (T + 1) ** 2 * T, T**4]
    for V, f in itertools.product(shifts, moduli):
        assert gauss_sum_structural(iso7, V, f) == gauss_sum_definitional(iso7, V, f), (V, f)


def test_structural_over_q13():
    field = field_spec(13)
    iso = omega_iso(field)
    T = Poly.T(field)
    assert gauss_sum_structural(iso, T, T + 1) == gauss_sum_definitional(iso, T, T + 1)


def test_local_gauss_sum(f7, iso7):
    for P in [Poly(f7, (1, 0, 1)), Poly(f7, (3, 1))]:
        for k in (1, 2):
            one = Poly.one(f7)
            expected = gauss_sum_definitional(iso7, one, P) if k == 1 else gauss_sum_definitional(
                iso7, one, P
            ).conj()
            assert local_gauss_sum(iso7, P, k) == expected


def test_signature_table(f7, iso7):
    table = signature_table(iso7, 3)
    one = Poly.one(f7)
    for f in _monic_up_to(f7, 3):
        if f.degree == 3 and f.monic_index % 11:
            continue
        assert table.value(f) == gauss_sum_structural(iso7, one, f), f


@pytest.mark.parametrize("m", [0, 1, 2])
def test_poisson_summation(f7, iso7, m):
    T = Poly.T(f7)
    for f in [T, T + 1, T * T + 1, T * (T + 2), T**2, T**3, (T + 1) * T**2]:
        assert poisson_check(iso7, f, m), (f, m)


def test_poisson_base_case_and_negative_degree(f7, iso7):
    T = Poly.T(f7)
    lhs, rhs = poisson_sides(iso7, T + 3, 0)
    assert lhs == 1
    assert rhs == 1
    with pytest.raises(ValueError):
        poisson_sides(iso7, T, -1)


def test_no_oscillation():
    field = field_spec(5)
    for d in (1, 2):
        for f in enumerate_monic(field, d, squarefree=True):
            assert no_oscillation_check(field, f)


def test_full_gauss_sum_factorization(f7):
    for ch in itertools.islice(enumerate_characters(f7, 2, KUMMER), 12):
        assert full_gauss_sum(ch) == full_gauss_sum_factored(ch)


def test_root_number_routes_agree(f7):
    for ch in itertools.islice(enumerate_characters(f7, 2, KUMMER), 20):
        omega = root_number(ch)
        assert omega.is_unit()
        assert root_number_from_gauss_sum(ch) == root_number_from_coefficient(ch).raise_order(21)


def test_kummer_root_number_fast_route(f7, iso7):
    table = signature_table(iso7, 2)
    for ch in itertools.islice(enumerate_characters(f7, 2, KUMMER), 20):
        s1, e1 = int(table.sign[2][ch.F1.monic_index]), int(table.expo[2][ch.F1.monic_index])
        s2, e2 = int(table.sign[1][ch.F2.monic_index]), int(table.expo[1][ch.F2.monic_index])
        fast = kummer_root_number(iso7, 2, 1, s1 * s2, e1 - e2)
        assert fast == root_number(ch).value
