import logging
from functools import lru_cache
from itertools import combinations

import numpy as np

from ffcubic.lib.characters import chi_F, classes_mod, kummer_pairs
from ffcubic.lib.cyclotomic import CycNum
from ffcubic.lib.ffpoly import Poly, factor, factor_table, gcd, monic_matrix

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def monic_character_sum(iso, f, m):
    """S(m) = sum of chi_f(L) over L in M_m."""
    classes = classes_mod(iso, factor(f), monic_matrix(iso.field, m)).astype(np.int64)
    return CycNum.from_exponent_counts(3, np.bincount(classes[classes >= 0], minlength=3))


@lru_cache(maxsize=None)
def _squarefree_upto(field, d):
    """[(F, mu(F))] for squarefree monic F with deg F <= d."""
    table = factor_table(field, max(d, 1))
    out = []
    for e in range(d + 1):
        for index in np.flatnonzero(table.squarefree[e]):
            out.append((Poly.from_monic_index(field, e, int(index)), int(table.mobius[e][index])))
    return out


def _divisors_upto(H, d):
    """[(R, mu(R))] over monic R | H with deg R <= d, for squarefree H."""
    primes = [P for P, _ in factor(H)]
    one = Poly.one(H.field)
    out = []
    for k in range(len(primes) + 1):
        for subset in combinations(primes, k):
            R = one
            for P in subset:
                R = R * P
            if R.degree <= d:
                out.append((R, -1 if k % 2 else 1))
    return out


def _coprime(a, b):
    return gcd(a, b).degree == 0


def sieve_lhs(iso, f, d1, d2):
    """sum of chi_f(F1) conj(chi_f(F2)) over coprime squarefree monic (F1, F2) of degrees (d1, d2)."""
    field = iso.field
    total = CycNum.zero(3)
    for i1, i2 in kummer_pairs(field, d1, d2):
        F1 = Poly.from_monic_index(field, d1, i1)
        F2 = Poly.from_monic_index(field, d2, i2)
        total = total + chi_F(iso, f, F1) * chi_F(iso, f, F2).conj()
    return total


def sieve_rhs_gcd_outer(iso, f, d1, d2):
    """Right side with H outermost and R_i | H carrying the gcd of D_i and H."""

    def chi(F):
        return chi_F(iso, f, F)

    def S(m):
        return monic_character_sum(iso, f, m)

    field = iso.field
    total = CycNum.zero(3)
    for H, mu_H in _squarefree_upto(field, min(d1, d2)):
        if not _coprime(H, f):
            continue
        h = H.degree
        for R1, mu_R1 in _divisors_upto(H, d1 - h):
            for R2, mu_R2 in _divisors_upto(H, d2 - h):
                weight = chi(R1) * chi(R2) ** 2 * (mu_H * mu_R1 * mu_R2)
                if weight.is_zero():
                    continue
                for D1, mu_D1 in _squarefree_upto(field, (d1 - h - R1.degree) // 2):
                    if not _coprime(D1, H):
                        continue
                    m1 = d1 - 2 * D1.degree - h - R1.degree
                    left = weight * chi(D1) ** 2 * mu_D1 * S(m1)
                    if left.is_zero():
                        continue
                    for D2, mu_D2 in _squarefree_upto(field, (d2 - h - R2.degree) // 2):
                        if not _coprime(D2, H):
                            continue
                        m2 = d2 - 2 * D2.degree - h - R2.degree
                        total = total + left * chi(D2) * mu_D2 * S(m2).conj()
    return total


def sieve_rhs_squares_outer(iso, f, d1, d2):
    """Right side with the square parts D1, D2 outermost and H running over all shifts."""

    def chi(F):
        return chi_F(iso, f, F)

    def S(m):
        return monic_character_sum(iso, f, m)

    field = iso.field
    total = CycNum.zero(3)
    for D1, mu_D1 in _squarefree_upto(field, d1 // 2):
        for D2, mu_D2 in _squarefree_upto(field, d2 // 2):
            outer = chi(D1) ** 2 * chi(D2) * (mu_D1 * mu_D2)
            if outer.is_zero():
                continue
            room1 = d1 - 2 * D1.degree
            room2 = d2 - 2 * D2.degree
            for H, mu_H in _squarefree_upto(field, min(d1 - D1.degree, d2 - D2.degree)):
                if not _coprime(H, f):
                    continue
                G1 = gcd(D1, H)
                G2 = gcd(D2, H)
                if H.degree - G1.degree > room1 or H.degree - G2.degree > room2:
                    continue
                m1 = room1 - H.degree + G1.degree
                m2 = room2 - H.degree + G2.degree
                inner = chi(G1) ** 2 * chi(G2) * mu_H
                total = total + outer * inner * S(m1) * S(m2).conj()
    return total


def sieve_identity_check(iso, f, d1, d2):
    if not f.is_monic():
        raise ValueError(f"Sieve modulus {f} must be monic.")
    if d1 < 0 or d2 < 0:
        raise ValueError(f"Degrees must be nonnegative, got ({d1}, {d2}).")
    lhs = sieve_lhs(iso, f, d1, d2)
    by_gcd = sieve_rhs_gcd_outer(iso, f, d1, d2)
    by_squares = sieve_rhs_squares_outer(iso, f, d1, d2)
    if lhs != by_gcd or lhs != by_squares:
        logger.warning(
            "Sieve identity fails for f = %s, (d1, d2) = (%d, %d): %s, %s, %s",
            f, d1, d2, lhs, by_gcd, by_squares,
        )
        return False
    return True
