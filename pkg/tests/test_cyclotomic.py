import cmath
from fractions import Fraction

import pytest

from ffcubic.lib.cyclotomic import (
    ComplexApprox,
    CycNum,
    HalfPowNum,
    ThirdPowNum,
    embed_complex,
    root_of_unity,
)


def test_cube_roots_of_unity_sum_to_zero():
    total = root_of_unity(3, 0) + root_of_unity(3, 1) + root_of_unity(3, 2)
    assert total.is_zero()
    assert total == 0


@pytest.mark.parametrize("m, k, expected", [(6, 3, -1), (4, 2, -1), (3, 3, 1), (5, 0, 1)])
def test_rational_roots_of_unity(m, k, expected):
    assert root_of_unity(m, k) == expected


def test_conjugate_of_xi3_is_its_square():
    xi = root_of_unity(3, 1)
    assert xi.conj() == root_of_unity(3, 2)
    assert xi * xi.conj() == 1


def test_norm_of_one_minus_xi3():
    assert (1 - root_of_unity(3, 1)).norm() == 3


@pytest.mark.parametrize("m", [3, 7, 15, 21])
def test_inverse(m):
    x = CycNum.from_fractions(m, [Fraction(1, 2), 3] + [0] * (CycNum.one(m).phi - 2))
    assert x * x.inverse() == 1
    assert x / x == 1


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        CycNum.zero(3).inverse()


def test_mixed_orders_need_raise_order():
    with pytest.raises(ValueError):
        root_of_unity(3, 1) + root_of_unity(7, 1)
    assert root_of_unity(3, 1) == root_of_unity(21, 7)


def test_raise_and_lower_order():
    x = 2 * root_of_unity(3, 1) - Fraction(1, 3)
    lifted = x.raise_order(21)
    assert lifted.order == 21
    assert lifted.lower_order(3) == x


def test_lower_order_rejects_outside_subfield():
    with pytest.raises(ValueError):
        root_of_unity(21, 1).lower_order(3)


def test_galois_action():
    xi = root_of_unity(7, 1)
    assert xi.galois(3) == root_of_unity(7, 3)
    with pytest.raises(ValueError):
        xi.galois(7)


def test_exponent_counts():
    value = CycNum.from_exponent_counts(3, [2, 1, 1])
    assert value == 1


def test_serialize_and_parse():
    x = root_of_unity(3, 1) * Fraction(5, 2) + 1
    assert CycNum.parse(x.serialize()) == x
    with pytest.raises(ValueError):
        CycNum.parse("3:1,2")


def test_half_powers():
    one = CycNum.one(3)
    root = HalfPowNum.from_power(5, one, 1)
    assert root * root == Fraction(1, 5)
    assert HalfPowNum.from_power(5, one, -2) == 5
    assert HalfPowNum.from_power(5, one, 4) == Fraction(1, 25)
    assert abs(embed_complex(root).value - 5**-0.5) < 1e-12


def test_half_power_parse():
    x = HalfPowNum(7, root_of_unity(3, 1), CycNum.rational(3, 2))
    assert HalfPowNum.parse(x.serialize()) == x


def test_half_power_folds_into_fields_holding_sqrt5():
    xi5 = root_of_unity(15, 3)
    x = HalfPowNum.from_power(5, CycNum.one(15), 1)
    assert x.odd.is_zero()
    assert x == (xi5 * 2 + xi5 ** 4 * 2 + 1) * Fraction(1, 5)
    assert HalfPowNum(5, CycNum.zero(15), CycNum.one(15) * 5) == xi5 * 2 + xi5 ** 4 * 2 + 1
    assert abs(embed_complex(x).value - 5**-0.5) < 1e-12
    assert x == HalfPowNum.from_power(5, CycNum.one(3), 1)
    assert hash(x) == hash(HalfPowNum.from_power(5, CycNum.one(3), 1))


def test_half_power_of_square_q_is_rational():
    x = HalfPowNum.from_power(25, CycNum.one(3), 1)
    assert x.odd.is_zero()
    assert x == Fraction(1, 5)
    assert hash(x) == hash(Fraction(1, 5))
    assert HalfPowNum.from_power(25, root_of_unity(3, 1), 3) == root_of_unity(3, 1) * Fraction(1, 125)


def test_half_power_sqrt7_sign():
    x = HalfPowNum.from_power(7, CycNum.one(28), 1)
    assert x.odd.is_zero()
    assert x * x == Fraction(1, 7)
    assert abs(embed_complex(x).value - 7**-0.5) < 1e-12
    assert x == HalfPowNum.from_power(7, CycNum.one(3), 1)
    assert HalfPowNum.from_power(7, CycNum.one(3), 1) != HalfPowNum.from_power(7, CycNum.one(3), 3)


def test_hash_ignores_order():
    x = root_of_unity(3, 1) * 2 + Fraction(1, 3)
    assert hash(x) == hash(x.raise_order(12))
    assert hash(root_of_unity(6, 2)) == hash(root_of_unity(3, 1))
    assert hash(CycNum.rational(5, Fraction(2, 7))) == hash(Fraction(2, 7))
    assert len({x, x.raise_order(6), x.raise_order(15)}) == 1


def test_third_powers():
    one = CycNum.one(3)
    product = ThirdPowNum(7, one, 1) * ThirdPowNum(7, one, 2)
    assert product.to_cyc() == 7
    assert ThirdPowNum(7, one, 3) + ThirdPowNum(7, one, 0) == ThirdPowNum(7, CycNum.rational(3, 8), 0)
    with pytest.raises(ValueError):
        ThirdPowNum(7, one, 1) + ThirdPowNum(7, one, 2)


def test_complex_embedding():
    z = embed_complex(root_of_unity(3, 1))
    assert z.close_to(cmath.exp(2j * cmath.pi / 3), 1e-12)
    assert ComplexApprox(1.0, 2.0).conj().im == -2.0
