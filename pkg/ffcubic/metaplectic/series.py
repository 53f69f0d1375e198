import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ffcubic.configs.config import Config
from ffcubic.lib.characters import classes_mod_prime
from ffcubic.lib.cyclotomic import CycNum
from ffcubic.lib.ffpoly import Poly, factor, monic_matrix
from ffcubic.lib.gauss import gauss_order, gauss_sum_structural, signature_table, tau
from ffcubic.lib.utils import DegreeCapExceeded

logger = logging.getLogger(__name__)

config = Config()


def _as_cyc(order, value):
    if isinstance(value, CycNum):
        return value if value.order == order else value.raise_order(order)
    return CycNum.rational(order, Fraction(value))


class TruncatedSeries:
    """Power series in u known exactly up to u^precision, coefficients in Q(xi_order)."""

    __slots__ = ("order", "precision", "coeffs")

    def __init__(self, order, precision, coeffs=None):
        self.order = order
        self.precision = precision
        self.coeffs = {}
        for k, c in (coeffs or {}).items():
            if 0 <= k <= precision:
                c = _as_cyc(order, c)
                if not c.is_zero():
                    self.coeffs[k] = c

    @classmethod
    def zero(cls, order, precision):
        return cls(order, precision)

    @classmethod
    def one(cls, order, precision):
        return cls(order, precision, {0: 1})

    @classmethod
    def monomial(cls, order, precision, k, c=1):
        return cls(order, precision, {k: c})

    @classmethod
    def geometric(cls, order, precision, ratio, step):
        """1 / (1 - ratio u^step)."""
        ratio = _as_cyc(order, ratio)
        coeffs = {}
        power = CycNum.one(order)
        for k in range(0, precision + 1, step):
            coeffs[k] = power
            power = power * ratio
        return cls(order, precision, coeffs)

    def coefficient(self, k):
        return self.coeffs.get(k, CycNum.zero(self.order))

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            if other.order != self.order:
                raise ValueError(f"Series orders differ ({self.order} vs {other.order}).")
            return other
        return TruncatedSeries(self.order, self.precision, {0: other})

    def __add__(self, other):
        other = self._coerce(other)
        precision = min(self.precision, other.precision)
        coeffs = dict(self.coeffs)
        for k, c in other.coeffs.items():
            coeffs[k] = coeffs[k] + c if k in coeffs else c
        return TruncatedSeries(self.order, precision, coeffs)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.order, self.precision, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            scalar = _as_cyc(self.order, other)
            return TruncatedSeries(
                self.order, self.precision, {k: c * scalar for k, c in self.coeffs.items()}
            )
        other = self._coerce(other)
        precision = min(self.precision, other.precision)
        coeffs = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                k = i + j
                if k <= precision:
                    coeffs[k] = coeffs[k] + a * b if k in coeffs else a * b
        return TruncatedSeries(self.order, precision, coeffs)

    __rmul__ = __mul__

    def shift(self, k, c=1):
        """self * c u^k."""
        scalar = _as_cyc(self.order, c)
        return TruncatedSeries(
            self.order, self.precision, {i + k: a * scalar for i, a in self.coeffs.items()}
        )

    def differences(self, other):
        """Degrees up to the common precision where the two series disagree."""
        other = self._coerce(other)
        precision = min(self.precision, other.precision)
        return [
            k for k in range(precision + 1) if self.coefficient(k) != other.coefficient(k)
        ]

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return not self.differences(other)

    __hash__ = None

    def to_json(self):
        return {str(k): self.coeffs[k].serialize() for k in sorted(self.coeffs)}

    def __repr__(self):
        terms = " + ".join(f"({c.serialize()})u^{k}" for k, c in sorted(self.coeffs.items()))
        return f"{terms or '0'} + O(u^{self.precision + 1})"


@dataclass(frozen=True)
class GaussSeries:
    """sum of G(f, F) u^deg F over monic F, optionally by deg F mod 3 and coprimality."""

    f: Poly
    class_index: int
    series: TruncatedSeries
    avoid: Poly = None
    coprime: bool = False

    def coefficient(self, d):
        return self.series.coefficient(d)

    def to_json(self):
        return {
            "f": self.f.to_text(),
            "class_index": self.class_index,
            "avoid": None if self.avoid is None else self.avoid.to_text(),
            "coprime": self.coprime,
            "precision": self.series.precision,
            "coeffs": self.series.to_json(),
        }


def check_degree(d, cap=None):
    cap = config.c_sum_max_degree if cap is None else cap
    if d > cap:
        raise DegreeCapExceeded(d, cap)


@lru_cache(maxsize=256)
def _classes_on_degree(iso, P, d):
    return classes_mod_prime(iso, P, monic_matrix(iso.field, d)).astype(np.int64)


def _supported_products(field, primes, d):
    """Monic products of the given primes of total degree <= d, starting with 1."""
    out = [Poly.one(field)]

    def grow(start, current):
        for j in range(start, len(primes)):
            nxt = current * primes[j]
            while nxt.degree <= d:
                out.append(nxt)
                grow(j + 1, nxt)
                nxt = nxt * primes[j]

    grow(0, Poly.one(field))
    return out


def _twisted_signature_sum(iso, W_factors, d, exclude):
    """sum of conj(chi_F(W)) G(1, F) / tau^d over squarefree monic F of degree d prime to W and exclude."""
    table = signature_table(iso, d)
    sign = table.sign[d].astype(np.int64)
    expo = table.expo[d].astype(np.int64)
    live = sign != 0
    shift = np.zeros_like(expo)
    for P, k in W_factors:
        cls = _classes_on_degree(iso, P, d)
        live &= cls >= 0
        shift += k * cls
    for P in exclude:
        live &= _classes_on_degree(iso, P, d) >= 0
    exponents = (expo - shift) % 3
    positive = np.bincount(exponents[live & (sign > 0)], minlength=3)
    negative = np.bincount(exponents[live & (sign < 0)], minlength=3)
    return CycNum.from_exponent_counts(3, positive - negative)


@lru_cache(maxsize=None)
def coefficient_c(iso, f, d, avoid=None, coprime=False):
    """C(f, d) = sum of G(f, F) over F in M_d, optionally with F prime to avoid or to f.

    F splits as F1 F0 with F1 supported on the primes of f and F0 prime to f, so that
    G(f, F) = G(f, F1) G(f F1, F0) and G(f F1, F0) = conj(chi_F0(f F1)) G(1, F0) is read off
    the signature table with chi_F0(f F1) = chi_(f F1)(F0).
    """
    field = iso.field
    if field.q % 6 != 1:
        raise ValueError(f"C-sums need q = 1 mod 6, got q = {field.q}.")
    if not f.is_monic():
        raise ValueError(f"C-sum shift {f} must be monic.")
    if d < 0:
        raise ValueError(f"Degree must be nonnegative, got {d}.")
    check_degree(d)
    order = gauss_order(field)
    exclude = () if avoid is None else (avoid,)
    head_primes = [] if coprime else [P for P, _ in factor(f) if P != avoid]
    t = tau(iso)
    total = CycNum.zero(order)
    for F1 in _supported_products(field, head_primes, d):
        head = gauss_sum_structural(iso, f, F1)
        if head.is_zero():
            continue
        d0 = d - F1.degree
        inner = _twisted_signature_sum(iso, factor(f * F1), d0, exclude)
        if inner.is_zero():
            continue
        total = total + head * inner.raise_order(order) * t**d0
    return total


def gauss_series(iso, f, N, class_index=None, avoid=None, coprime=False):
    """Truncated sum of C(f, k) u^k over k <= N, restricted to k = class_index mod 3 when given."""
    order = gauss_order(iso.field)
    coeffs = {}
    for k in range(N + 1):
        if class_index is not None and (k - class_index) % 3:
            continue
        coeffs[k] = coefficient_c(iso, f, k, avoid=avoid, coprime=coprime)
    residue = None if class_index is None else class_index % 3
    return GaussSeries(f, residue, TruncatedSeries(order, N, coeffs), avoid, coprime)


def psi_series(iso, f, N):
    """Psi(f, u) = sum over all monic F of G(f, F) u^deg F."""
    return gauss_series(iso, f, N)


def psi_tilde(iso, f, N):
    """sum over monic F prime to f of G(f, F) u^deg F."""
    return gauss_series(iso, f, N, coprime=True)


def psi_class_series(iso, f, i, N):
    """psi(f, i, u) = S_i(u) / (1 - q^3 u^3) with S_i the degree-class series."""
    q = iso.field.q
    S = gauss_series(iso, f, N, class_index=i).series
    return S * TruncatedSeries.geometric(S.order, N, q**3, 3)
