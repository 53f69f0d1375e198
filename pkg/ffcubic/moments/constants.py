import cmath
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
import sympy

from ffcubic.configs.config import Config
from ffcubic.lib.cyclotomic import EPS, ComplexApprox
from ffcubic.lib.ffpoly import count_irreducibles
from ffcubic.lib.utils import ConsistencyError

logger = logging.getLogger(__name__)

config = Config()

TAIL_TERMS = 20
SERIES_CUTOFF = 1e-4

XI = cmath.exp(2j * math.pi / 3)


def zeta_q(q, s):
    """Z_q(q^-s) = 1 / (1 - q^(1 - s)); exact when 1 - s is an integer."""
    s = Fraction(s)
    if s == 1:
        raise ValueError("zeta_q has a pole at s = 1.")
    exponent = 1 - s
    if exponent.denominator == 1:
        return 1 / (1 - Fraction(q) ** int(exponent))
    return 1.0 / (1.0 - q ** float(exponent))


def _log1p(z):
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < SERIES_CUTOFF
    series = z - z**2 / 2 + z**3 / 3 - z**4 / 4
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.log(1 + np.where(small, 0, z))
    return np.where(small, series, direct)


def _prime_counts(q, degrees):
    return np.array([float(count_irreducibles(q, int(d))) for d in degrees])


def _geometric_tail(terms):
    """Sum of the explicit terms plus a geometric continuation of the last ratio."""
    terms = np.asarray(terms, dtype=float)
    if not np.all(np.isfinite(terms)):
        raise ValueError("Euler product tail is not finite.")
    last, previous = terms[-1], terms[-2]
    if last == 0:
        return float(terms.sum())
    ratio = last / previous if previous > 0 else 1.0
    if ratio >= 1:
        raise ValueError("Euler product does not converge at this point.")
    return float(terms.sum() + last * ratio / (1 - ratio))


@dataclass(frozen=True)
class EulerProductSpec:
    """prod over monic primes R of F_q[T] of factor(deg R).

    `excess(d)` returns factor - 1 on an integer array of degrees and `derivative(d)` the
    derivative of the factor in the product's variable. Degrees up to `truncation` are
    multiplied out; the rest is bounded through |log(1 + z)| <= |z| / (1 - |z|).
    """

    q: int
    excess: Callable
    derivative: Optional[Callable] = None
    truncation: Optional[int] = None
    name: str = "euler product"

    @property
    def degree(self):
        D = config.euler_truncation if self.truncation is None else self.truncation
        if D < 1:
            raise ValueError(f"Euler truncation must be positive, got {D}.")
        return D

    def _degrees(self):
        return np.arange(1, self.degree + 1)

    def _tail_degrees(self):
        return np.arange(self.degree + 1, self.degree + TAIL_TERMS + 1)

    def tail_bound(self):
        degrees = self._tail_degrees()
        z = np.abs(self.excess(degrees))
        if np.any(z >= 1):
            raise ValueError(f"{self.name}: factors past the truncation are not close to 1.")
        return _geometric_tail(_prime_counts(self.q, degrees) * z / (1 - z))

    def log_value(self):
        degrees = self._degrees()
        logs = _prime_counts(self.q, degrees) * _log1p(self.excess(degrees))
        rounding = 8 * EPS * float(np.sum(np.abs(logs) + 1))
        return complex(np.sum(logs)), rounding

    def evaluate(self):
        total, rounding = self.log_value()
        value = cmath.exp(total)
        err = abs(value) * math.expm1(self.tail_bound() + rounding)
        return ComplexApprox(value.real, value.imag, err)

    def log_derivative(self):
        if self.derivative is None:
            raise ValueError(f"{self.name} has no factor derivative.")
        degrees = self._degrees()
        terms = _prime_counts(self.q, degrees) * self.derivative(degrees) / (1 + self.excess(degrees))
        tail_degrees = self._tail_degrees()
        z = np.abs(self.excess(tail_degrees))
        tail = _geometric_tail(
            _prime_counts(self.q, tail_degrees) * np.abs(self.derivative(tail_degrees)) / (1 - z)
        )
        total = complex(np.sum(terms))
        err = tail + 8 * EPS * float(np.sum(np.abs(terms) + 1))
        return ComplexApprox(total.real, total.imag, err)

    def derivative_value(self):
        return self.evaluate() * self.log_derivative()


def kummer_count_product(q, u=None, truncation=None):
    """F_K(u) = prod (1 - 3 u^(2d) + 2 u^(3d)), by default at u = 1/q."""
    u = 1 / q if u is None else u

    def excess(d):
        return -3 * u ** (2 * d) + 2 * u ** (3 * d) + 0j

    def derivative(d):
        return -6 * d * u ** (2 * d - 1) + 6 * d * u ** (3 * d - 1) + 0j

    return EulerProductSpec(q, excess, derivative, truncation, "F_K")


def nonkummer_count_product(q, u=None, truncation=None):
    """F_nK(u): 1 - 3 u^(2d) + 2 u^(3d) at even degrees and 1 - u^(2d) at odd ones."""
    u = 1 / q if u is None else u

    def excess(d):
        even = -3 * u ** (2 * d) + 2 * u ** (3 * d)
        return np.where(d % 2 == 0, even, -(u ** (2 * d))) + 0j

    return EulerProductSpec(q, excess, None, truncation, "F_nK")


def kummer_count_constants(q, truncation=None):
    """(B_K1, B_K2) = (F_K(1/q), F_K(1/q) - F_K'(1/q) / q)."""
    product = kummer_count_product(q, truncation=truncation)
    value = product.evaluate()
    return value, value - product.derivative_value() * Fraction(1, q)


def nonkummer_count_constant(q, truncation=None):
    return nonkummer_count_product(q, truncation=truncation).evaluate()


def _check_a_nk_region(q, x, u):
    x, u = abs(x), abs(u)
    if not (x < 1 / q and x * u < 1 / q and x * u * u < 1 / q**2):
        raise ValueError(
            f"A_nK diverges at x = {x}, u = {u}; need |x| < 1/q, |xu| < 1/q and |xu^2| < 1/q^2."
        )


def a_nk_product(q, x, u, truncation=None):
    """A_nK(x, u): 1/(1 + x^d) at odd degrees, (1 + 2 x^(d/2)(1 - u^d)) / (1 + x^(d/2))^2 at even ones."""
    _check_a_nk_region(q, x, u)

    def excess(d):
        s = x ** (d // 2)
        even = -(2 * s * u**d + s * s) / (1 + s) ** 2
        odd = -(x**d) / (1 + x**d)
        return np.where(d % 2 == 0, even, odd) + 0j

    return EulerProductSpec(q, excess, None, truncation, "A_nK")


def constant_A_nK(q, x, u, truncation=None):
    return a_nk_product(q, x, u, truncation).evaluate()


def a_nk_closed_form(q, point, truncation=None):
    """A_nK at (1/q^2, q^-3/2) for point "3/2" and at (1/q^2, 1/q) for point "1", written in |R|."""
    if point not in ("3/2", "1"):
        raise ValueError(f"Closed forms exist at the points '3/2' and '1', got {point!r}.")

    def excess(d):
        R = np.power(float(q), d)
        odd = -1 / (R * R + 1)
        if point == "3/2":
            even = -1 / (R + 1) ** 2 - 2 / (np.sqrt(R) * (R + 1) ** 2)
        else:
            even = -3 / (R + 1) ** 2
        return np.where(d % 2 == 0, even, odd) + 0j

    return EulerProductSpec(q, excess, None, truncation, f"A_nK closed form at {point}")


def a_nk_closed_form_check(q, tol=1e-8, truncation=None):
    ok = True
    for point, u in (("3/2", q**-1.5), ("1", 1 / q)):
        generic = constant_A_nK(q, q**-2, u, truncation)
        closed = a_nk_closed_form(q, point, truncation).evaluate()
        if not generic.close_to(closed, tol):
            logger.warning("A_nK closed form at %s disagrees for q = %d: %s vs %s", point, q, generic, closed)
            ok = False
    return ok


def knk_product(q, u=None, truncation=None):
    """K_nK(u) = B_nK(u, 1) J_nK(1) as one Euler product, by default at u = q^(-1/6)."""
    u = q ** (-1 / 6) if u is None else u

    def excess(d):
        # With w = (u q^(-5/6))^d, z = u^(3d) |R|^(-3/2) and kappa = C_R(1) - 1 the B-factor is
        # 1 + (z (1 - w) - w^2 - kappa w (1 - z)) / ((1 - z) C_R(1)), free of cancellation.
        R = np.power(float(q), d)
        odd = d % 2 == 1
        w = (u / q ** (5 / 6)) ** d
        z = u ** (3 * d) / R**1.5
        kappa = np.where(odd, 0.0, 2 / R)
        b = (z * (1 - w) - w * w - kappa * w * (1 - z)) / ((1 - z) * (1 + kappa))
        j = np.where(odd, -(R**-2) / (1 + R**-2), -(R**-2) / (1 + 1 / R) ** 2)
        return b + j + b * j + 0j

    return EulerProductSpec(q, excess, None, truncation, "K_nK")


def knk_equals_ank_check(q, tol=1e-6, truncation=None):
    """K_nK(q^(-1/6)) against A_nK(1/q^2, 1/q)."""
    if q % 3 != 2:
        raise ValueError(f"K_nK is defined for q = 2 mod 3, got q = {q}.")
    knk = knk_product(q, truncation=truncation).evaluate()
    ank = constant_A_nK(q, q**-2, 1 / q, truncation)
    if not knk.close_to(ank, tol):
        logger.warning("K_nK(q^-1/6) = %s but A_nK(1/q^2, 1/q) = %s for q = %d", knk, ank, q)
        return False
    return True


def knk_factor_identity(parity):
    """Single-prime factor of K_nK at u = q^(-1/6) equals the A_nK(1/q^2, 1/q) factor.

    |R| = r^6, so u^deg R = 1/r and the identity is one of rational functions in r.
    """
    r = sympy.symbols("r", positive=True)
    R = r**6
    ud = 1 / r
    t1 = ud / r**5 / (1 - ud**3 / r**9)
    t2 = ud**3 / (r**9 - ud**3)
    if parity == "odd":
        C = 1 + 1 / R**2 - 1 / R**2
        J = 1 - R**-2 / (1 + R**-2)
        A = 1 - 1 / (R**2 + 1)
    elif parity == "even":
        C = (1 + 1 / R) ** 2 - 1 / R**2
        J = 1 - R**-2 / (1 + 1 / R) ** 2
        A = 1 - 3 / (R + 1) ** 2
    else:
        raise ValueError(f"Parity must be 'odd' or 'even', got {parity!r}.")
    B = (1 - 1 / R) * (1 + (t1 + t2) / C)
    return sympy.cancel(B * J - A) == 0


def _d_k_excess(q, x, y, u):
    c = u * q**-1.5

    def excess(d):
        X, Y, C = x**d, y**d, c**d
        head = -X * X - Y * Y - X * Y + X * X * Y + Y * Y * X
        tail = -X - Y + X * X + Y * Y + 2 * X * Y - X * X * Y - Y * Y * X
        return head + C * tail + 0j

    return excess


def d_k_product(q, x, y, u, truncation=None):
    """D_K(x, y, u), one factor per prime with c = u q^(-3/2)."""
    return EulerProductSpec(q, _d_k_excess(q, x, y, u), None, truncation, "D_K")


def d_k_diagonal_product(q, x, u, truncation=None):
    """D_K(x, x, u) as a function of x, with its exact factor derivatives."""
    c = u * q**-1.5

    def excess(d):
        X, C = x**d, c**d
        return -3 * X**2 + 2 * X**3 + C * (-2 * X + 4 * X**2 - 2 * X**3) + 0j

    def derivative(d):
        C = c**d
        inner = -2 * d * x ** (d - 1) + 8 * d * x ** (2 * d - 1) - 6 * d * x ** (3 * d - 1)
        return -6 * d * x ** (2 * d - 1) + 6 * d * x ** (3 * d - 1) + C * inner + 0j

    return EulerProductSpec(q, excess, derivative, truncation, "D_K diagonal")


def d_k_derivative_check(q, u, x=None, step=None, tol=None, truncation=None):
    """Logarithmic-derivative value of d/dx D_K(x, x, u) against a central difference."""
    x = 1 / q if x is None else x
    step = config.finite_difference_step if step is None else step
    tol = config.finite_difference_tolerance if tol is None else tol
    analytic = d_k_diagonal_product(q, x, u, truncation).derivative_value().value
    upper = d_k_diagonal_product(q, x + step, u, truncation).evaluate().value
    lower = d_k_diagonal_product(q, x - step, u, truncation).evaluate().value
    numeric = (upper - lower) / (2 * step)
    relative = abs(analytic - numeric) / max(abs(analytic), EPS)
    if relative > tol:
        logger.warning(
            "d/dx D_K(x, x, %s) at x = %s: analytic %s, central difference %s", u, x, analytic, numeric
        )
        return False
    return True


@dataclass(frozen=True)
class KummerConstants:
    q: int
    g: int
    C_K1: ComplexApprox
    C_K2: ComplexApprox
    D_K1: ComplexApprox
    D_K2: ComplexApprox

    def to_json(self):
        return {
            "q": self.q,
            "g": self.g,
            "C_K1": self.C_K1.to_json(),
            "C_K2": self.C_K2.to_json(),
            "D_K1": self.D_K1.to_json(),
            "D_K2": self.D_K2.to_json(),
        }


def _kummer_pair(q, g, u, zeta, truncation):
    diagonal = d_k_diagonal_product(q, 1 / q, u, truncation)
    base = diagonal.evaluate()
    slope = diagonal.derivative_value()
    twisted = d_k_product(q, 1 / q, XI / q, u, truncation).evaluate()
    twisted_sq = d_k_product(q, XI**2 / q, 1 / q, u, truncation).evaluate()
    first = base * zeta * Fraction(1, 3)
    second = zeta * (
        base * Fraction(2, 3)
        - slope * Fraction(1, 3 * q)
        - twisted * (XI ** (g + 1) / (3 * (1 - XI)))
        - twisted_sq * (XI ** (2 * g + 2) / (3 * (1 - XI**2)))
    )
    return first, second


def constants_kummer(q, g, truncation=None):
    """C_K1, C_K2 (u = 1, zeta_q(3/2)) and D_K1, D_K2 (u = sqrt(q), zeta_q(1/2)) for genus g."""
    if q % 3 != 1:
        raise ValueError(f"Kummer constants need q = 1 mod 3, got q = {q}.")
    for u in (1.0, math.sqrt(q)):
        if not d_k_derivative_check(q, u, truncation=truncation):
            raise ConsistencyError(f"Diagonal derivative of D_K fails its difference check at u = {u}.")
    C_K1, C_K2 = _kummer_pair(q, g, 1.0, zeta_q(q, Fraction(3, 2)), truncation)
    D_K1, D_K2 = _kummer_pair(q, g, math.sqrt(q), zeta_q(q, Fraction(1, 2)), truncation)
    for name, value in (("C_K1", C_K1), ("C_K2", C_K2)):
        if abs(value.im) > value.err + 1e-8:
            raise ConsistencyError(f"{name} = {value} is not real for q = {q}, g = {g}.")
    return KummerConstants(q, g, C_K1, C_K2, D_K1, D_K2)


def nonkummer_main_term(q, g, truncation=None):
    """zeta_q(3/2) / zeta_q(3) A_nK(1/q^2, q^(-3/2)) q^(g+2)."""
    A = constant_A_nK(q, q**-2, q**-1.5, truncation)
    ratio = zeta_q(q, Fraction(3, 2)) / float(zeta_q(q, 3))
    return A * ratio * float(q) ** (g + 2)


def nonkummer_secondary_term(q, g, A, truncation=None):
    """zeta_q(1/2) / zeta_q(3) A_nK(1/q^2, 1/q) q^(g + 2 - A/6)."""
    value = constant_A_nK(q, q**-2, 1 / q, truncation)
    ratio = zeta_q(q, Fraction(1, 2)) / float(zeta_q(q, 3))
    return value * ratio * float(q) ** (g + 2 - A / 6)


def kummer_main_term(q, g, constants=None, truncation=None):
    """C_K1 g q^(g+1) + C_K2 q^(g+1)."""
    constants = constants or constants_kummer(q, g, truncation)
    scale = float(q) ** (g + 1)
    return constants.C_K1 * (g * scale) + constants.C_K2 * scale
