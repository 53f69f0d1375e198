import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ffcubic.lib.characters import monic_classes
from ffcubic.lib.cyclotomic import CycNum, HalfPowNum, embed_complex
from ffcubic.lib.gauss import root_number

logger = logging.getLogger(__name__)


def genus_of(character):
    deg_h = character.conductor.degree
    return deg_h - 2 if character.is_even else deg_h - 1


def class_count_coefficient(classes):
    classes = np.asarray(classes, dtype=np.int64)
    return CycNum.from_exponent_counts(3, np.bincount(classes[classes >= 0], minlength=3))


@dataclass(frozen=True)
class LPolynomial:
    """L(u, chi) = sum over n < deg h of a_n u^n, a_n = sum over f in M_n of chi(f)."""

    character: object
    coeffs: tuple

    @property
    def q(self):
        return self.character.field.q

    @property
    def genus(self):
        return genus_of(self.character)

    def coefficient(self, n):
        if 0 <= n < len(self.coeffs):
            return self.coeffs[n]
        return CycNum.zero(3)

    def partial_sums(self):
        out = []
        total = CycNum.zero(3)
        for a in self.coeffs:
            total = total + a
            out.append(total)
        return out

    def completed_coeffs(self):
        """Coefficients of L(u) for odd chi and of L(u)/(1-u) for even chi."""
        if self.character.is_even:
            return self.partial_sums()[:-1]
        return list(self.coeffs)

    def conj(self):
        return LPolynomial(self.character.conj(), tuple(a.conj() for a in self.coeffs))

    def to_json(self):
        return [a.serialize() for a in self.coeffs]


@lru_cache(maxsize=4096)
def l_polynomial(character):
    deg_h = character.conductor.degree
    coeffs = tuple(
        class_count_coefficient(monic_classes(character, n)) for n in range(max(deg_h, 1))
    )
    return LPolynomial(character, coeffs)


@dataclass(frozen=True)
class CentralValue:
    """L(1/2, chi) as an element of Q(xi_3)[q^(-1/2)]."""

    value: HalfPowNum
    character: object

    def to_json(self):
        return {"exact": self.value.serialize(), "complex": embed_complex(self.value).to_json()}


def _half_sum(q, coeffs, start=0):
    total = HalfPowNum(q, CycNum.zero(3))
    for n, a in enumerate(coeffs, start=start):
        total = total + HalfPowNum.from_power(q, a, n)
    return total


def direct_central_value(character, lpoly=None):
    lpoly = lpoly or l_polynomial(character)
    return CentralValue(_half_sum(lpoly.q, lpoly.coeffs), character)


def functional_equation_check(character, lpoly=None, omega=None):
    """a_n = omega q^(n-g/2) conj(a_(g-n)) for odd chi; the same on partial sums b_n for even chi."""
    lpoly = lpoly or l_polynomial(character)
    omega = omega if omega is not None else root_number(character).value
    q = lpoly.q
    g = lpoly.genus
    if character.is_even:
        if sum(lpoly.coeffs, CycNum.zero(3)) != 0:
            logger.warning("Coefficients of an even character do not vanish at u = 1: %s",
                           character.descriptor())
            return False
        values = lpoly.partial_sums()
    else:
        values = list(lpoly.coeffs)
    values = values + [CycNum.zero(3)] * max(0, g + 1 - len(values))
    for n in range(g + 1):
        lhs = HalfPowNum(q, values[n])
        rhs = omega * HalfPowNum.from_power(q, values[g - n].conj(), g - 2 * n)
        if lhs != rhs:
            logger.warning("Functional equation fails at n = %d for %s", n, character.descriptor())
            return False
    return True


def afe_value(character, A, lpoly=None, omega=None):
    """L(1/2, chi) split at A into a principal sum and an omega-weighted dual sum."""
    lpoly = lpoly or l_polynomial(character)
    g = lpoly.genus
    if not 0 <= A <= g:
        raise ValueError(f"AFE split A = {A} is outside [0, {g}].")
    omega = omega if omega is not None else root_number(character).value
    q = lpoly.q
    principal = _half_sum(q, [lpoly.coefficient(n) for n in range(A + 1)])
    dual = _half_sum(q, [lpoly.coefficient(n).conj() for n in range(g - A)])
    value = principal + omega * dual
    if character.is_even:
        boundary = HalfPowNum.from_power(q, lpoly.coefficient(A + 1), A + 1) + omega * (
            HalfPowNum.from_power(q, lpoly.coefficient(g - A).conj(), g - A)
        )
        # 1/(1 - sqrt(q)) = -(1 + q^(1/2)) / (q - 1) written in powers of q^(-1/2)
        weight = HalfPowNum(
            q,
            CycNum.rational(3, Fraction(-1, q - 1)),
            CycNum.rational(3, Fraction(-q, q - 1)),
        )
        value = value + boundary * weight
    return CentralValue(value, character)


def weil_check(lpoly, tol=1e-9):
    """Every root of the completed L-polynomial has |u| = q^(-1/2) within tol; returns (ok, worst)."""
    coeffs = lpoly.completed_coeffs()
    while coeffs and coeffs[-1].is_zero():
        coeffs.pop()
    if len(coeffs) <= 1:
        return True, 0.0
    values = np.array([embed_complex(a).value for a in coeffs[::-1]])
    roots = np.roots(values)
    target = lpoly.q ** -0.5
    worst = float(np.max(np.abs(np.abs(roots) - target)))
    return worst <= tol, worst
