import itertools

import numpy as np
import pytest

from ffcubic.lib.characters import (
    KUMMER,
    NONKUMMER,
    chi3,
    chi_class,
    classes_mod,
    enumerate_characters,
    kummer_blocks,
    monic_classes,
    omega_iso,
    residue_class,
)
from ffcubic.lib.cyclotomic import root_of_unity
from ffcubic.lib.ffpoly import Poly, enumerate_monic, factor, field_spec, gcd, is_irreducible


@pytest.fixture(scope="module")
def f7():
    return field_spec(7)


@pytest.fixture(scope="module")
def iso7(f7):
    return omega_iso(f7)


def _symbol(iso, modulus, a):
    rows = np.array([a.coeffs], dtype=np.int64)
    value = int(classes_mod(iso, factor(modulus), rows)[0])
    return None if value < 0 else value


def _monic_up_to(field, d):
    for n in range(d + 1):
        yield from enumerate_monic(field, n)


def test_chi3_of_primitive_root(iso7):
    assert chi3(iso7, 3) == root_of_unity(3, 1)
    assert chi3(iso7, 0) == 0
    assert chi3(iso7, 6) == 1


def test_conjugate_iso(f7):
    assert omega_iso(f7, conjugate=True).cube_class(3) == 2


def test_omega_needs_cube_roots():
    with pytest.raises(ValueError):
        omega_iso(field_spec(5))


def test_euclid_matches_euler_criterion(f7, iso7):
    primes = [P for P in _monic_up_to(f7, 2) if P.degree >= 1 and is_irreducible(P)]
    for P in primes:
        for a in _monic_up_to(f7, 2):
            assert chi_class(iso7, P, a) == residue_class(iso7, P, a)


def test_residue_class_needs_prime(f7, iso7):
    T = Poly.T(f7)
    with pytest.raises(ValueError):
        residue_class(iso7, T * T, T + 1)


def test_cubic_reciprocity_exhaustive(f7, iso7):
    polys = [f for f in _monic_up_to(f7, 2) if f.degree >= 1]
    for A, B in itertools.combinations(polys, 2):
        if gcd(A, B).degree:
            continue
        assert _symbol(iso7, A, B) == _symbol(iso7, B, A)
        assert chi_class(iso7, A, B) == _symbol(iso7, A, B)


def test_kummer_blocks():
    assert kummer_blocks(2) == [(2, 1)]
    for g in range(6):
        for d1, d2 in kummer_blocks(g):
            assert d1 + d2 == g + 1
            assert (d1 + 2 * d2) % 3 == 1


def test_kummer_count_q7_g2(f7):
    characters = list(enumerate_characters(f7, 2, KUMMER))
    assert len(characters) == 252
    assert all(ch.genus == 2 and not ch.is_even for ch in characters)


def test_nonkummer_count_q5_g2():
    characters = list(enumerate_characters(field_spec(5), 2, NONKUMMER))
    assert len(characters) == 480
    assert all(ch.is_even and ch.conductor.degree == 4 for ch in characters)


def test_nonkummer_odd_genus_is_empty():
    assert list(enumerate_characters(field_spec(5), 3, NONKUMMER)) == []


@pytest.mark.parametrize("q, setting", [(5, KUMMER), (7, NONKUMMER)])
def test_enumeration_rejects_wrong_setting(q, setting):
    with pytest.raises(ValueError):
        list(enumerate_characters(field_spec(q), 2, setting))


def test_restriction_to_constants(f7, iso7):
    for ch in itertools.islice(enumerate_characters(f7, 2, KUMMER), 10):
        for c in range(1, 7):
            expected = (iso7.cube_class(c) * ch.restriction) % 3
            assert ch.value_class(Poly.const(f7, c)) == expected


def test_conjugate_character(f7):
    ch = next(enumerate_characters(f7, 2, KUMMER))
    T = Poly.T(f7)
    for a in (T + 1, T * T + 3, T + 5):
        if ch.value_class(a) is None:
            continue
        assert ch(a) * ch.conj()(a) == 1
    assert ch.conj().conj() == ch


def test_monic_classes_agree_with_pointwise(f7):
    ch = next(enumerate_characters(f7, 2, KUMMER))
    classes = monic_classes(ch, 2)
    for index in range(0, 49, 5):
        value = ch.value_class(Poly.from_monic_index(f7, 2, index))
        assert int(classes[index]) == (-1 if value is None else value)


def test_nonkummer_values_on_constants_are_trivial():
    ch = next(enumerate_characters(field_spec(5), 2, NONKUMMER))
    for c in range(1, 5):
        assert ch.value_class(Poly.const(field_spec(5), c)) == 0
