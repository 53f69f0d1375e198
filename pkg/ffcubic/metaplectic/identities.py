import logging
from fractions import Fraction
from itertools import combinations

from ffcubic.lib.characters import chi_F
from ffcubic.lib.cyclotomic import CycNum
from ffcubic.lib.ffpoly import Poly, cube_decompose, factor, is_irreducible
from ffcubic.lib.gauss import gauss_order, gauss_sum_structural, tau
from ffcubic.metaplectic.residues import class_series, polynomial_p
from ffcubic.metaplectic.series import TruncatedSeries, psi_series, psi_tilde

logger = logging.getLogger(__name__)


def _one_minus(order, N, coefficient, step):
    """1 - coefficient u^step as a truncated series."""
    return TruncatedSeries.one(order, N) - TruncatedSeries.monomial(order, N, step, coefficient)


def hecke_sides(iso, f, pi, i, N):
    """Both sides of the four Hecke relations for the degree class i, truncated at u^N.

    S is the class series (1 - q^3 u^3) psi and S_pi its restriction to moduli prime to pi.
    """
    if not is_irreducible(pi) or not pi.is_monic():
        raise ValueError(f"{pi} is not a monic prime.")
    if pi.divides(f):
        raise ValueError(f"{pi} divides {f}.")
    q = iso.field.q
    d = pi.degree
    order = gauss_order(iso.field)
    G = gauss_sum_structural(iso, f, pi)

    def S(shift, k):
        return class_series(iso, shift, k, N)

    def S_pi(shift, k):
        return class_series(iso, shift, k, N, avoid=pi)

    sides = {
        "j0": (S(f, i), S_pi(f, i) + S_pi(f * pi, i - d).shift(d, G)),
        "j1": (
            S(f * pi, i),
            S_pi(f * pi, i) + S_pi(f, i - 2 * d).shift(2 * d, G.conj() * q**d),
        ),
        "j2": (_one_minus(order, N, q ** (2 * d), 3 * d) * S_pi(f * pi**2, i), S(f * pi**2, i)),
    }
    for j in range(3):
        lower = f * pi**j
        sides[f"periodic{j}"] = (
            S(lower * pi**3, i) - S(lower, i).shift(3 * d, q ** (3 * d)),
            _one_minus(order, N, q ** (2 * d), 3 * d) * S_pi(lower, i),
        )
    return sides


def verify_hecke_relations(iso, f, pi, N):
    ok = True
    for i in range(3):
        for name, (lhs, rhs) in hecke_sides(iso, f, pi, i, N).items():
            bad = lhs.differences(rhs)
            if bad:
                logger.warning(
                    "Hecke relation %s fails for f = %s, pi = %s, i = %d at degrees %s", name, f, pi, i, bad
                )
                ok = False
    return ok


def _laurent(order, terms):
    out = {}
    for k, c in terms.items():
        c = c if isinstance(c, CycNum) else CycNum.rational(order, Fraction(c))
        if c.order != order:
            c = c.raise_order(order)
        if not c.is_zero():
            out[k] = c
    return out


def _laurent_add(a, b):
    out = dict(a)
    for k, c in b.items():
        out[k] = out[k] + c if k in out else c
    return {k: c for k, c in out.items() if not c.is_zero()}


def _laurent_mul(a, b):
    out = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out[i + j] + x * y if i + j in out else x * y
    return {k: c for k, c in out.items() if not c.is_zero()}


def _laurent_sub(a, b):
    return _laurent_add(a, {k: -c for k, c in b.items()})


def _reflected_numerator(order, q, coeffs, j):
    """(q^2 u)^-j P(q^-6 u^-3) as Laurent data."""
    return _laurent(
        order, {-3 * k - j: c * Fraction(1, q ** (6 * k + 2 * j)) for k, c in enumerate(coeffs)}
    )


def hoffstein_sides(iso, f, i, twist=None):
    """Both sides of the functional equation for psi(f, i, u), multiplied through by (q^2 u^3 - 1).

    psi(f, i, u) = u^i P(f, i, u^3) / (1 - q^4 u^3) turns the left side into u^i P(f, i, u^3)
    and psi at 1/(q^2 u) into (q^2 u)^-i P(f, i, q^-6 u^-3) q^2 u^3 / (q^2 u^3 - 1). The twist
    is the exponent k of W = tau(chi_3^k); by default k = 2i - 1 - deg f.
    """
    if not 0 <= i <= 2:
        raise ValueError(f"Class index must be 0, 1 or 2, got {i}.")
    field = iso.field
    q = field.q
    order = gauss_order(field)
    n = f.degree
    other = (1 + n - i) % 3
    k1 = (n + 1 - 2 * i) % 3
    W = tau(iso, (2 * i - 1 - n) % 3 if twist is None else twist % 3)

    pole = _laurent(order, {3: q**2, 0: -1})
    P_i = polynomial_p(iso, f, i)
    lhs = _laurent_mul(_laurent(order, {i + 3 * k: c for k, c in enumerate(P_i)}), pole)

    a1 = _laurent(order, {1 - k1: -(1 - Fraction(1, q)) * q ** (2 - k1)})
    a2 = _laurent(order, {-2: -W * Fraction(1, q**2), 1: W * q})
    bracket = _laurent_add(
        _laurent_mul(a1, _reflected_numerator(order, q, P_i, i)),
        _laurent_mul(a2, _reflected_numerator(order, q, polynomial_p(iso, f, other), other)),
    )
    rhs = _laurent_mul(bracket, _laurent(order, {n + 3: q ** (n + 2)}))
    return lhs, rhs


def no_pole_residual(rhs, q):
    """Remainder of the Laurent polynomial rhs after division by q^2 u^3 - 1."""
    if not rhs:
        return {}
    low = min(rhs)
    a = {k - low: c for k, c in rhs.items()}
    for k in range(max(a), 2, -1):
        c = a.pop(k, None)
        if c is None:
            continue
        c = c / q**2
        a[k - 3] = a[k - 3] + c if k - 3 in a else c
    return {k + low: c for k, c in a.items() if not c.is_zero()}


def no_pole_check(iso, f, i):
    _, rhs = hoffstein_sides(iso, f, i)
    residual = no_pole_residual(rhs, iso.field.q)
    if residual:
        logger.warning("Reflected side keeps a pole at u^3 = q^-2 for f = %s, i = %d: %s", f, i, residual)
    return not residual


def verify_hoffstein_fe(iso, f, i):
    lhs, rhs = hoffstein_sides(iso, f, i)
    residual = _laurent_sub(lhs, rhs)
    if residual:
        _, alternative = hoffstein_sides(iso, f, i, twist=2 * i - 1)
        logger.warning(
            "Functional equation fails for f = %s, i = %d; residual %s, residual with W = tau(chi_3^(2i-1)) %s",
            f,
            i,
            residual,
            _laurent_sub(lhs, alternative),
        )
        return False
    return True


def _squarefree_divisors(one, primes):
    for r in range(len(primes) + 1):
        for subset in combinations(primes, r):
            product = one
            for P in subset:
                product = product * P
            yield subset, product


def psi_tilde_expression(iso, f, N):
    """sum over F prime to f of G(f, F) u^deg F, rebuilt from full Psi series of cube-free shifts.

    With f = f1 f2^2 f3^3 and f3* the primes of f3 off f1 f2, the sum is
    prod_(P | f1 f2) E(P) sum_(a | f3*) mu(a) G(f1 f2^2, a) u^deg a prod_(P | a) E(P)
    sum_(l | a f1) mu(l) (q u^2)^deg l conj(G(1, l)) chi_l(a f1 f2^2 / l) Psi(a f1 f2^2 / l)
    with E(P) = 1 / (1 - q^(2 deg P) u^(3 deg P)).
    """
    field = iso.field
    q = field.q
    order = gauss_order(field)
    one = Poly.one(field)
    parts = cube_decompose(f)
    f1, f2 = parts.C, parts.B
    head = [P for P, _ in factor(f1 * f2)]
    starred = [P for P, _ in factor(parts.E) if not P.divides(f1 * f2)]
    base = f1 * f2**2

    def euler(primes):
        out = TruncatedSeries.one(order, N)
        for P in primes:
            e = P.degree
            out = out * TruncatedSeries.geometric(order, N, q ** (2 * e), 3 * e)
        return out

    total = TruncatedSeries.zero(order, N)
    for a_primes, a in _squarefree_divisors(one, starred):
        g = gauss_sum_structural(iso, base, a)
        if g.is_zero():
            continue
        sign = -1 if len(a_primes) % 2 else 1
        inner = TruncatedSeries.zero(order, N)
        for l_primes, l in _squarefree_divisors(one, list(a_primes) + [P for P, _ in factor(f1)]):
            rest = a * base // l
            weight = gauss_sum_structural(iso, one, l).conj() * chi_F(iso, l, rest).raise_order(order)
            if weight.is_zero():
                continue
            if len(l_primes) % 2:
                weight = -weight
            inner = inner + psi_series(iso, rest, N).series.shift(2 * l.degree, weight * q**l.degree)
        total = total + (euler(a_primes) * inner).shift(a.degree, g * sign)
    return euler(head) * total


def psi_tilde_sides(iso, f, N):
    return psi_tilde(iso, f, N).series, psi_tilde_expression(iso, f, N)


def verify_psi_tilde(iso, f, N):
    direct, rebuilt = psi_tilde_sides(iso, f, N)
    bad = direct.differences(rebuilt)
    if bad:
        logger.warning("Coprime Gauss series of %s disagrees with its divisor expression at degrees %s", f, bad)
    return not bad
