import pytest

from ffcubic.lib.ffpoly import (
    Poly,
    count_irreducibles,
    cube_decompose,
    enumerate_monic,
    euler_phi,
    factor,
    factor_table,
    field_from_q,
    field_spec,
    gcd,
    is_irreducible,
    is_squarefree,
    mobius,
    quadratic_extension,
)


@pytest.fixture(scope="module")
def f5():
    return field_spec(5)


@pytest.fixture(scope="module")
def f7():
    return field_spec(7)


@pytest.mark.parametrize("q", [9, 6, 4, 1])
def test_field_from_q_rejects(q):
    with pytest.raises(ValueError):
        field_from_q(q)


def test_field_from_prime_power():
    field = field_from_q(25)
    assert (field.p, field.n, field.q) == (5, 2, 25)
    for a in range(1, 25):
        assert field.mul(a, field.inv(a)) == 1
    assert all(field.trace(a) < 5 for a in range(25))


@pytest.mark.parametrize("q, d, expected", [(7, 2, 21), (5, 3, 40), (7, 1, 7), (5, 4, 150)])
def test_count_irreducibles(q, d, expected):
    assert count_irreducibles(q, d) == expected


def test_sieve_matches_counts(f7):
    table = factor_table(f7, 3)
    assert len(table.prime_indices(2)) == 21
    assert len(table.prime_indices(3)) == count_irreducibles(7, 3)
    assert int(table.squarefree[2].sum()) == 49 - 7
    assert all(is_irreducible(P) for P in table.primes(2))


def test_squarefree_quadratics(f5):
    assert int(factor_table(f5, 2).squarefree[2].sum()) == 20
    assert sum(1 for _ in enumerate_monic(f5, 2, squarefree=True)) == 20


def test_factor_t_squared_plus_one(f5):
    f = Poly.parse("T**2 + 1", f5)
    assert factor(f) == [(Poly(f5, (2, 1)), 1), (Poly(f5, (3, 1)), 1)]
    assert not is_irreducible(f)


def test_factor_reconstructs(f7):
    f = Poly(f7, (1, 0, 1)) ** 2 * Poly(f7, (1, 1)) ** 5 * 4
    product = Poly.one(f7)
    for prime, k in factor(f):
        assert prime.is_monic() and is_irreducible(prime)
        product = product * prime**k
    assert product.scale(f.lead) == f


def test_cube_decomposition(f7):
    P = Poly(f7, (1, 0, 1))
    Q = Poly(f7, (1, 1))
    parts = cube_decompose(P**2 * Q**5)
    assert (parts.E, parts.B, parts.C) == (Q, P * Q, Poly.one(f7))
    assert parts.reconstruct() == P**2 * Q**5


def test_divmod_and_gcd(f7):
    a = Poly(f7, (1, 2, 3, 4, 1))
    b = Poly(f7, (5, 0, 1))
    quotient, rem = divmod(a, b)
    assert quotient * b + rem == a
    assert rem.degree < b.degree
    assert gcd(a * b, b * Poly.T(f7)) == b.monic()
    with pytest.raises(ValueError):
        gcd(Poly(f7), Poly(f7))


def test_arithmetic_functions(f5):
    T = Poly.T(f5)
    assert mobius(T * (T + 1)) == 1
    assert mobius(T**2) == 0
    assert euler_phi(T**2) == 20
    assert is_squarefree(T * (T + 1))
    assert not is_squarefree(T**2 * (T + 1))


def test_parse_formats(f7):
    f = Poly.parse("q=7;[1,0,1]")
    assert f == Poly(f7, (1, 0, 1))
    assert Poly.parse(f.to_text()) == f
    assert Poly.parse("[1,0,1]", f7) == f
    with pytest.raises(ValueError):
        Poly.parse("q=7;[1,0,")
    with pytest.raises(ValueError):
        Poly.parse("T**2", None)


def test_monic_index_round_trip(f7):
    for index in (0, 8, 48):
        f = Poly.from_monic_index(f7, 2, index)
        assert f.is_monic() and f.monic_index == index


def test_quadratic_extension(f5):
    ext = quadratic_extension(f5)
    assert ext.big.q == 25
    f = Poly(f5, (2, 3, 1))
    big = ext.embed(f)
    assert ext.restrict(big) == f
    assert ext.conjugate(big) == big
    assert ext.norm_poly(big) == f * f
    with pytest.raises(ValueError):
        ext.restrict(Poly(ext.big, (7, 1)))
