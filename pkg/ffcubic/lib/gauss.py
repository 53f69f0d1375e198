import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ffcubic.lib.characters import (
    KUMMER,
    chi_class,
    chi_class_coeffs,
    class_to_cyc,
    classes_mod,
    classes_mod_prime,
    monic_classes,
    omega_iso,
)
from ffcubic.lib.cyclotomic import CycNum, HalfPowNum
from ffcubic.lib.ffpoly import Poly, digit_matrix, factor, factor_table, monic_matrix, quadratic_extension
from ffcubic.lib.utils import ConsistencyError

logger = logging.getLogger(__name__)


def gauss_order(field):
    """Cyclotomic order 3p holding every cubic Gauss sum over F_q."""
    return 3 * field.p


def _exponent_sum(field, classes, traces, order):
    keep = classes >= 0
    exponents = (
        classes[keep].astype(np.int64) * (order // 3) + traces[keep].astype(np.int64) * (order // field.p)
    ) % order
    return CycNum.from_exponent_counts(order, np.bincount(exponents, minlength=order))


@lru_cache(maxsize=None)
def tau(iso, k=1):
    """tau(chi_3^k) = sum over a in F_q^* of chi_3(a)^k e(tr(a)/p)."""
    field = iso.field
    order = gauss_order(field)
    nonzero = np.arange(1, field.q)
    classes = (iso.class_table[nonzero].astype(np.int64) * k) % 3
    return _exponent_sum(field, classes, field.trace_table[nonzero], order)


@lru_cache(maxsize=None)
def jacobi_sum(iso):
    """J(chi_3, chi_3) = sum over a of chi_3(a) chi_3(1 - a), in Z[xi_3]."""
    field = iso.field
    a = np.arange(field.q)
    one_minus = field.vsub(np.ones_like(a), a)
    c1 = iso.class_table[a].astype(np.int64)
    c2 = iso.class_table[one_minus].astype(np.int64)
    keep = (c1 >= 0) & (c2 >= 0)
    return CycNum.from_exponent_counts(3, np.bincount((c1[keep] + c2[keep]) % 3, minlength=3))


def tau_restriction(character):
    iso = omega_iso(character.field, character.conjugate)
    return tau(iso, character.restriction)


def epsilon(character):
    """epsilon(chi) = q^(-1/2) tau(chi) for odd chi, 1 for even chi."""
    field = character.field
    order = gauss_order(field)
    if character.is_even:
        return HalfPowNum(field.q, CycNum.one(order))
    return HalfPowNum(field.q, CycNum.zero(order), tau_restriction(character))


def _laurent_weights(V, f):
    """w_j = coefficient of T^(n-1) in T^j V mod f, so that the 1/T coefficient of uV/f is sum u_j w_j."""
    n = f.degree
    t = V % f
    T = Poly.T(f.field)
    weights = []
    for _ in range(n):
        weights.append(t.coeffs[n - 1] if len(t.coeffs) == n else 0)
        t = (t * T) % f
    return weights


def _residue_traces(field, rows, weights):
    acc = np.zeros(rows.shape[0], dtype=np.int64)
    for j, w in enumerate(weights):
        if w:
            acc = field.vadd(acc, field.vmul(rows[:, j], w))
    return field.trace_table[acc]


def gauss_sum_definitional(iso, V, f):
    """G(V, f) = sum over u mod f of chi_f(u) e_q(uV/f), summed over all q^deg f residues."""
    field = iso.field
    if not f.is_monic():
        raise ValueError(f"Gauss sum modulus {f} must be monic.")
    order = gauss_order(field)
    n = f.degree
    if n == 0:
        return CycNum.one(order)
    rows = digit_matrix(field.q, n)
    classes = classes_mod(iso, factor(f), rows)
    traces = _residue_traces(field, rows, _laurent_weights(V, f))
    return _exponent_sum(field, classes, traces, order)


def local_gauss_sum(iso, P, k):
    """g_k(P) = sum over v mod P of chi_P(v)^k e_q(v/P) = chi_P(P')^k (-1)^(deg P - 1) tau(chi_3^k)^deg P."""
    k %= 3
    d = P.degree
    order = gauss_order(iso.field)
    if k == 0:
        return CycNum.rational(order, -1)
    c = chi_class(iso, P, P.derivative())
    value = class_to_cyc(c * k, order) * tau(iso, k) ** d
    return value if d % 2 else -value


def _valuation(W, P):
    alpha = 0
    while True:
        quotient, rem = divmod(W, P)
        if not rem.is_zero():
            return alpha, W
        W = quotient
        alpha += 1


def prime_power_gauss_sum(iso, W, P, i):
    """G(W, P^i) from the prime-power table."""
    field = iso.field
    order = gauss_order(field)
    norm = P.norm
    if W.is_zero():
        alpha, W1 = None, None
    else:
        alpha, W1 = _valuation(W, P)
    if alpha is None or i <= alpha:
        if i % 3 == 0:
            return CycNum.rational(order, norm**i - norm ** (i - 1) if i else 1)
        return CycNum.zero(order)
    if i == alpha + 1:
        k = i % 3
        if k == 0:
            return CycNum.rational(order, -(norm ** (i - 1)))
        twist = class_to_cyc(-k * chi_class(iso, P, W1), order)
        return twist * local_gauss_sum(iso, P, k) * norm ** (i - 1)
    return CycNum.zero(order)


def gauss_sum_structural(iso, V, f):
    """G(V, f) through G(V, Q_1...Q_s) = prod_j G(V Q_(j+1)...Q_s, Q_j) over prime powers Q_j."""
    if iso.field.q % 6 != 1:
        raise ValueError(f"The structural Gauss sum needs q = 1 mod 6, got q = {iso.field.q}.")
    if not f.is_monic():
        raise ValueError(f"Gauss sum modulus {f} must be monic.")
    order = gauss_order(iso.field)
    result = CycNum.one(order)
    factors = factor(f)
    for j, (prime, i) in enumerate(factors):
        W = V
        for other, k in factors[j + 1:]:
            W = W * other**k
        value = prime_power_gauss_sum(iso, W, prime, i)
        if value.is_zero():
            return value
        result = result * value
    return result


def shifted_gauss_sum(iso, V, f, definitional_max_degree=4):
    if f.degree <= definitional_max_degree:
        return gauss_sum_definitional(iso, V, f)
    return gauss_sum_structural(iso, V, f)


class SignatureTable:
    """G(1, F) = sign(F) xi_3^e(F) tau^deg F for every squarefree monic F up to max_degree.

    With P the smallest prime of F and F = P R, e(F) = e(R) - class_P(R) + class_P(P') and
    sign(F) = sign(R) (-1)^(deg P - 1); sign is 0 off the squarefree locus.
    """

    def __init__(self, iso, max_degree):
        self.iso = iso
        self.field = iso.field
        self.max_degree = 0
        self.sign = [np.ones(1, dtype=np.int8)]
        self.expo = [np.zeros(1, dtype=np.int8)]
        self.extend(max_degree)

    def extend(self, max_degree):
        table = factor_table(self.field, max_degree)
        for d in range(self.max_degree + 1, max_degree + 1):
            self._build_degree(table, d)
            self.max_degree = d

    def _build_degree(self, table, d):
        field = self.field
        size = field.q**d
        sign = np.zeros(size, dtype=np.int8)
        expo = np.zeros(size, dtype=np.int8)
        spf_degree = table.spf_degree[d]
        squarefree = table.squarefree[d]

        prime_rows = monic_matrix(field, d)
        for index in table.prime_indices(d):
            coeffs = [int(c) for c in prime_rows[index]]
            derivative = [c * k % field.p if field.n == 1 else field.mul(c, k % field.p)
                          for k, c in enumerate(coeffs)][1:]
            while derivative and derivative[-1] == 0:
                derivative.pop()
            expo[index] = chi_class_coeffs(self.iso, coeffs, derivative)
            sign[index] = 1 if d % 2 else -1

        for e in range(1, d // 2 + 1):
            members = np.flatnonzero(squarefree & (spf_degree == e))
            if not members.size:
                continue
            p_index = table.spf_index[d][members]
            rest = table.cofactor[d][members]
            order = np.argsort(p_index, kind="stable")
            members, p_index, rest = members[order], p_index[order], rest[order]
            starts = np.flatnonzero(np.r_[True, p_index[1:] != p_index[:-1]])
            stops = np.r_[starts[1:], members.size]
            for start, stop in zip(starts, stops):
                pi = int(p_index[start])
                prime = Poly.from_monic_index(field, e, pi)
                group_rest = rest[start:stop]
                cls = classes_mod_prime(self.iso, prime, monic_matrix(field, d - e)[group_rest])
                group = members[start:stop]
                expo[group] = (
                    self.expo[d - e][group_rest].astype(np.int64) - cls + int(self.expo[e][pi])
                ) % 3
                sign[group] = self.sign[d - e][group_rest] * (1 if e % 2 else -1)
        self.sign.append(sign)
        self.expo.append(expo)

    def value(self, F):
        """G(1, F) for squarefree monic F, zero otherwise."""
        d = F.degree
        index = F.monic_index
        order = gauss_order(self.field)
        s = int(self.sign[d][index])
        if s == 0:
            return CycNum.zero(order)
        value = class_to_cyc(int(self.expo[d][index]), order) * tau(self.iso, 1) ** d
        return value if s > 0 else -value


_SIGNATURE_TABLES = {}


def signature_table(iso, max_degree):
    table = _SIGNATURE_TABLES.get(iso)
    if table is None:
        table = _SIGNATURE_TABLES[iso] = SignatureTable(iso, 0)
    table.extend(max_degree)
    return table


def full_gauss_sum(character):
    """G(chi) = sum over a mod h of chi(a) e_q(a/h), h the conductor."""
    field = character.field
    order = gauss_order(field)
    h = character.conductor
    n = h.degree
    if n == 0:
        return CycNum.one(order)
    rows = digit_matrix(field.q, n)
    if character.setting == KUMMER:
        iso = character.iso
        c1 = classes_mod(iso, factor(character.F1), rows)
        c2 = classes_mod(iso, factor(character.F2), rows)
        classes = np.where((c1 < 0) | (c2 < 0), -1, (c1.astype(np.int64) - c2) % 3)
    else:
        ext = character.extension
        classes = classes_mod(character.iso, factor(character.F), ext.embed_table[rows])
    traces = _residue_traces(field, rows, _laurent_weights(Poly.one(field), h))
    return _exponent_sum(field, classes, traces, order)


def full_gauss_sum_factored(character):
    """G(1, F1) conj(G(1, F2)) for Kummer characters, G_{q^2}(1, F) for non-Kummer ones."""
    if character.setting == KUMMER:
        iso = character.iso
        one = Poly.one(character.field)
        return (
            gauss_sum_definitional(iso, one, character.F1)
            * gauss_sum_definitional(iso, one, character.F2).conj()
        )
    big = character.extension.big
    return gauss_sum_definitional(character.iso, Poly.one(big), character.F)


@dataclass(frozen=True)
class RootNumber:
    value: HalfPowNum
    parity_branch: str

    def is_unit(self):
        return self.value * self.value.conj() == 1


def top_coefficient(character):
    """a_(deg h - 1) = sum of chi over monic polynomials of degree deg h - 1."""
    n = character.conductor.degree - 1
    classes = monic_classes(character, n).astype(np.int64)
    return CycNum.from_exponent_counts(3, np.bincount(classes[classes >= 0], minlength=3))


def root_number_from_coefficient(character, a_top=None):
    q = character.field.q
    deg_h = character.conductor.degree
    if a_top is None:
        a_top = top_coefficient(character)
    if character.is_even:
        return -HalfPowNum.from_power(q, a_top, deg_h - 2)
    return HalfPowNum.from_power(q, a_top, deg_h - 1)


def root_number_from_gauss_sum(character, gauss_value=None):
    q = character.field.q
    deg_h = character.conductor.degree
    if gauss_value is None:
        gauss_value = full_gauss_sum(character)
    if character.is_even:
        return HalfPowNum.from_power(q, gauss_value, deg_h)
    t = tau_restriction(character)
    return HalfPowNum.from_power(q, t.conj() * gauss_value * Fraction(1, q), deg_h - 1)


def root_number(character):
    """omega(chi), computed from the Gauss sum and from the top L-coefficient; both must agree."""
    order = gauss_order(character.field)
    from_gauss = root_number_from_gauss_sum(character)
    from_coefficient = root_number_from_coefficient(character)
    if from_gauss != from_coefficient.raise_order(order):
        raise ConsistencyError(
            f"Root number routes disagree for {character.descriptor()}: "
            f"{from_gauss} vs {from_coefficient}"
        )
    return RootNumber(from_coefficient, character.parity)


def kummer_root_number(iso, d1, d2, sign, expo):
    """omega(chi_F1 conj(chi_F2)) from the signatures of G(1, F1) and G(1, F2), in Q(xi_3).

    omega = conj(tau) G(1,F1) conj(G(1,F2)) q^(-(g+2)/2) with d1 - d2 - 1 = 3k and
    tau^3 = q J(chi_3, chi_3).
    """
    q = iso.field.q
    k, rem = divmod(d1 - d2 - 1, 3)
    if rem:
        raise ValueError(f"Degrees ({d1}, {d2}) do not give an odd chi_3-restricted character.")
    J = jacobi_sum(iso)
    power = J**k if k >= 0 else (J.conj() * Fraction(1, q)) ** (-k)
    value = class_to_cyc(expo) * power * Fraction(q) ** (1 + d2 + k)
    if sign < 0:
        value = -value
    return HalfPowNum.from_power(q, value, d1 + d2 + 1)


def poisson_sides(iso, f, m):
    """Both sides of Poisson summation for sum over h in M_m of chi_f(h), exactly.

    The identity is stated for m >= 1; m = 0 (M_0 = {1}, left side chi_f(1) = 1) is kept as a base case.
    """
    if m < 0:
        raise ValueError(f"Poisson summation needs m >= 0, got {m}.")
    field = iso.field
    order = gauss_order(field)
    n = f.degree
    rows = monic_matrix(field, m)
    classes = classes_mod(iso, factor(f), rows).astype(np.int64)
    lhs = CycNum.from_exponent_counts(3, np.bincount(classes[classes >= 0], minlength=3))
    lhs = lhs.raise_order(order)

    def monic_sum(d):
        total = CycNum.zero(order)
        if d < 0:
            return total
        for index in range(field.q**d):
            total = total + shifted_gauss_sum(iso, Poly.from_monic_index(field, d, index), f)
        return total

    scale = Fraction(field.q**m, field.q**n)
    if n % 3 == 0:
        short = CycNum.zero(order)
        for d in range(0, n - m - 1):
            short = short + monic_sum(d)
        rhs = (
            shifted_gauss_sum(iso, Poly(field), f)
            + short * (field.q - 1)
            - monic_sum(n - m - 1)
        ) * scale
    else:
        rhs = tau(iso, n).conj() * monic_sum(n - m - 1) * scale
    return lhs, rhs


def poisson_check(iso, f, m):
    lhs, rhs = poisson_sides(iso, f, m)
    return lhs == rhs


def no_oscillation_check(field, f):
    """G_{q^2}(1, f) = q^deg f for squarefree f in F_q[T], q = 2 mod 3."""
    ext = quadratic_extension(field)
    iso = omega_iso(ext.big)
    value = gauss_sum_definitional(iso, Poly.one(ext.big), ext.embed(f))
    return value == field.q**f.degree
