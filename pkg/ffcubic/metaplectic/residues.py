import logging
from dataclasses import dataclass
from fractions import Fraction

from ffcubic.lib.cyclotomic import CycNum, embed_complex
from ffcubic.lib.ffpoly import Poly, cube_decompose, factor
from ffcubic.lib.gauss import gauss_order, gauss_sum_structural
from ffcubic.lib.utils import ConsistencyError, DegreeCapExceeded
from ffcubic.metaplectic.series import (
    TruncatedSeries,
    check_degree,
    coefficient_c,
    gauss_series,
    psi_class_series,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResidueValue:
    f: Poly
    i: int
    value: CycNum

    def to_json(self):
        return {
            "f": self.f.to_text(),
            "i": self.i,
            "exact": self.value.serialize(),
            "complex": embed_complex(self.value).to_json(),
        }


def b_bound(f, i):
    """Degree bound max(0, floor((1 + deg f - i) / 3)) of P(f, i, x)."""
    return max(0, (1 + f.degree - i) // 3)


def residue_degree(f, i):
    """Largest C-sum degree that rho(f, i) needs."""
    r = i % 3
    return r + 3 * (b_bound(f, r) + 1)


def _q_power(q, k):
    return Fraction(q) ** k


def polynomial_p(iso, f, i):
    """Coefficients of P(f, i, x), low to high, with psi(f, i, u) = u^i P(f, i, u^3) / (1 - q^4 u^3).

    N(x) = (1 - q^4 x) sum_{j < J} C(f, i + 3j) x^j + C(f, i + 3J) x^J with J = B + 1 is
    divided exactly by 1 - q^3 x.
    """
    if not 0 <= i <= 2:
        raise ValueError(f"Class index must be 0, 1 or 2, got {i}.")
    q = iso.field.q
    order = gauss_order(iso.field)
    B = b_bound(f, i)
    J = B + 1
    C = [coefficient_c(iso, f, i + 3 * j) for j in range(J + 1)]
    numerator = [CycNum.zero(order) for _ in range(J + 1)]
    for j in range(J):
        numerator[j] = numerator[j] + C[j]
        numerator[j + 1] = numerator[j + 1] - C[j] * q**4
    numerator[J] = numerator[J] + C[J]

    coeffs = []
    carry = CycNum.zero(order)
    for k in range(J):
        carry = numerator[k] + carry * q**3
        coeffs.append(carry)
    if not (numerator[J] + carry * q**3).is_zero():
        raise ConsistencyError(f"P({f}, {i}, x) does not divide out to a polynomial.")
    while coeffs and coeffs[-1].is_zero():
        coeffs.pop()
    if len(coeffs) - 1 > B:
        raise ConsistencyError(f"P({f}, {i}, x) has degree {len(coeffs) - 1} above the bound {B}.")
    return coeffs


def evaluate_p(coeffs, x, order):
    total = CycNum.zero(order)
    power = Fraction(1)
    for c in coeffs:
        total = total + c * power
        power = power * x
    return total


def rho(iso, f, i):
    """Residue rho(f, i), from P(f, r, q^-4) and from the stable quotient of C-sums, r = i mod 3.

    Literal indices outside 0..2 follow rho(f, i) = q^(4(i - r)/3) rho(f, r).
    """
    field = iso.field
    q = field.q
    order = gauss_order(field)
    r = i % 3
    via_p = evaluate_p(polynomial_p(iso, f, r), Fraction(1, q**4), order)

    J = b_bound(f, r) + 1
    scale = (1 - Fraction(1, q)) * q ** (4 * J)
    via_quotient = coefficient_c(iso, f, r + 3 * J) / scale
    if via_p != via_quotient:
        raise ConsistencyError(f"Residue routes disagree for rho({f}, {r}): {via_p} vs {via_quotient}")
    try:
        check_degree(r + 3 * (J + 1))
    except DegreeCapExceeded:
        pass
    else:
        later = coefficient_c(iso, f, r + 3 * (J + 1)) / (scale * q**4)
        if later != via_p:
            raise ConsistencyError(f"C-sum recurrence breaks past J = {J} for rho({f}, {r}).")
    return ResidueValue(f, i, via_p * _q_power(q, 4 * (i - r) // 3))


def explicit_residue_sides(iso, f, i):
    """rho(f, i) against conj(G(1, f1)) q^((4i - 4r - 2 deg f1)/3) rho(1, r), r = (i - 2 deg f) mod 3."""
    field = iso.field
    q = field.q
    order = gauss_order(field)
    lhs = rho(iso, f, i).value
    parts = cube_decompose(f)
    if not parts.B.is_one():
        return lhs, CycNum.zero(order)
    f1 = parts.C
    r = (i - 2 * f.degree) % 3
    t = 4 * i - 4 * r - 2 * f1.degree
    if t % 3:
        raise ConsistencyError(f"Residue formula leaves q^({t}/3) for f = {f}, i = {i}.")
    gauss = gauss_sum_structural(iso, Poly.one(field), f1).conj()
    rhs = gauss * rho(iso, Poly.one(field), r).value * _q_power(q, t // 3)
    return lhs, rhs


def verify_explicit_residue(iso, f, i):
    lhs, rhs = explicit_residue_sides(iso, f, i)
    if lhs != rhs:
        logger.warning("Explicit residue formula fails for f = %s, i = %d: %s vs %s", f, i, lhs, rhs)
        return False
    return True


def periodicity_sides(iso, f, pi, j, i):
    """rho(f pi^(j+3), i) and rho(f pi^j, i)."""
    return rho(iso, f * pi ** (j + 3), i).value, rho(iso, f * pi**j, i).value


def patterson_sides(iso, f, pi, i):
    """rho(f pi, i) against conj(G(f, pi)) q^(2 deg pi) rho(f, i - 2 deg pi) for pi prime to f."""
    if pi.divides(f):
        raise ValueError(f"{pi} divides {f}.")
    q = iso.field.q
    d = pi.degree
    lhs = rho(iso, f * pi, i).value
    rhs = gauss_sum_structural(iso, f, pi).conj() * rho(iso, f, i - 2 * d).value * q ** (2 * d)
    return lhs, rhs


def psi_rationality_sides(iso, f, i, N):
    """(1 - q^4 u^3) psi(f, i, u) against u^i P(f, i, u^3), truncated at u^N."""
    q = iso.field.q
    psi = psi_class_series(iso, f, i, N)
    order = psi.order
    lhs = psi - psi.shift(3, q**4)
    rhs = TruncatedSeries(
        order, N, {i + 3 * k: c for k, c in enumerate(polynomial_p(iso, f, i))}
    )
    return lhs, rhs


@dataclass(frozen=True)
class MainTermComparison:
    f: Poly
    d: int
    exact_sum: CycNum
    main_term: CycNum
    relative_error: float

    def to_json(self):
        return {
            "f": self.f.to_text(),
            "d": self.d,
            "exact_sum": self.exact_sum.serialize(),
            "main_term": self.main_term.serialize(),
            "main_term_complex": embed_complex(self.main_term).to_json(),
            "relative_error": self.relative_error,
        }


def gauss_average_main_term(iso, f, d):
    """Main term of the sum of G(f, F) over F in M_d prime to f.

    delta(f2 = 1) q^((4d - 4r - 2 deg f1)/3) (1 - 1/q) conj(G(1, f1)) rho(1, r)
    prod over P | f1 f3* of (1 + 1/|P|)^-1, with r = (d + deg f1) mod 3.
    """
    field = iso.field
    q = field.q
    order = gauss_order(field)
    parts = cube_decompose(f)
    if not parts.B.is_one():
        return CycNum.zero(order)
    f1 = parts.C
    r = (d + f1.degree) % 3
    t = 4 * d - 4 * r - 2 * f1.degree
    if t % 3:
        raise ConsistencyError(f"Main term leaves q^({t}/3) for f = {f}, d = {d}.")
    value = (
        gauss_sum_structural(iso, Poly.one(field), f1).conj()
        * rho(iso, Poly.one(field), r).value
        * _q_power(q, t // 3)
        * (1 - Fraction(1, q))
    )
    for prime, _ in factor(f):
        value = value * Fraction(prime.norm, prime.norm + 1)
    return value


def compare_main_term(iso, f, d):
    q = iso.field.q
    exact = coefficient_c(iso, f, d, coprime=True)
    main = gauss_average_main_term(iso, f, d)
    error = abs(embed_complex(exact - main).value) / q ** (4 * d / 3)
    return MainTermComparison(f, d, exact, main, error)


def class_series(iso, f, i, N, avoid=None):
    """S_i(f) = sum of G(f, F) u^deg F over deg F = i mod 3, optionally with F prime to avoid."""
    return gauss_series(iso, f, N, class_index=i, avoid=avoid).series
