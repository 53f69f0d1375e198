import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy
from sympy import cyclotomic_poly, totient

EPS = np.finfo(float).eps


@lru_cache(maxsize=None)
def cyclotomic_low_coeffs(m):
    """Coefficients c_0..c_{phi-1} of Phi_m = x^phi + sum c_j x^j."""
    x = sympy.Symbol("x")
    coeffs = sympy.Poly(cyclotomic_poly(m, x), x).all_coeffs()[::-1]
    return tuple(int(c) for c in coeffs[:-1])


@lru_cache(maxsize=None)
def power_rows(m):
    """Rows of x^k mod Phi_m for k in [0, m), as tuples of ints."""
    phi = int(totient(m))
    low = cyclotomic_low_coeffs(m)
    rows = []
    vec = [0] * phi
    vec[0] = 1
    for _ in range(m):
        rows.append(tuple(vec))
        carry = vec[-1]
        vec = [0] + vec[:-1]
        if carry:
            vec = [v - carry * c for v, c in zip(vec, low)]
    return tuple(rows)


@lru_cache(maxsize=None)
def power_table(m):
    table = np.array(power_rows(m), dtype=np.int64)
    table.setflags(write=False)
    return table


def _reduce(m, full):
    phi = len(power_rows(m)[0])
    rows = power_rows(m)
    out = [0] * phi
    for k, c in enumerate(full):
        if not c:
            continue
        k %= m
        if k < phi:
            out[k] += c
        else:
            for j, r in enumerate(rows[k]):
                if r:
                    out[j] += c * r
    return out


def _coerce_rational(value):
    if isinstance(value, bool):
        raise TypeError("Booleans are not cyclotomic numbers.")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    return None


def _mobius(d):
    exponents = sympy.factorint(d).values()
    if any(e > 1 for e in exponents):
        return 0
    return -1 if len(exponents) % 2 else 1


@lru_cache(maxsize=None)
def _trace_weights(m):
    """Tr(xi_m^j) / phi(m) = mu(d) / phi(d) with d = m / gcd(j, m), for j < phi(m)."""
    weights = []
    for j in range(int(totient(m))):
        d = m // math.gcd(j, m)
        weights.append(Fraction(_mobius(d), int(totient(d))))
    return tuple(weights)


def _prime_power(q):
    factors = sympy.factorint(q)
    if len(factors) != 1:
        raise ValueError(f"{q} is not a prime power.")
    ((p, n),) = factors.items()
    return p, n


@lru_cache(maxsize=None)
def sqrt_conductor(q):
    """Least m with sqrt(q) in Q(xi_m)."""
    p, n = _prime_power(q)
    if n % 2 == 0:
        return 1
    if p == 2:
        return 8
    return p if p % 4 == 1 else 4 * p


@lru_cache(maxsize=None)
def sqrt_in_order(q, m):
    """sqrt(q) as a CycNum of order m, or None when it is not in Q(xi_m)."""
    if m % sqrt_conductor(q):
        return None
    p, n = _prime_power(q)
    if n % 2 == 0:
        return CycNum.rational(m, p ** (n // 2))
    if p == 2:
        root = CycNum.root_of_unity(8, 1) + CycNum.root_of_unity(8, -1)
    else:
        counts = [0] * p
        for a in range(1, p):
            counts[a] = int(sympy.legendre_symbol(a, p))
        gauss = CycNum(p, counts)
        # gauss^2 = (-1)^((p-1)/2) p
        if p % 4 == 1:
            root = gauss
        else:
            root = gauss.raise_order(4 * p) * CycNum.root_of_unity(4 * p, 3 * p)
    return root.raise_order(m) * p ** ((n - 1) // 2)


class CycNum:
    """Exact element of Q(xi_m) in the power basis modulo Phi_m."""

    __slots__ = ("order", "num", "den")

    def __init__(self, order, num, den=1):
        if order < 1:
            raise ValueError(f"Cyclotomic order must be positive, got {order}.")
        if den == 0:
            raise ZeroDivisionError("Zero denominator in cyclotomic number.")
        num = _reduce(order, [int(c) for c in num])
        den = int(den)
        if den < 0:
            num = [-c for c in num]
            den = -den
        g = den
        for c in num:
            g = math.gcd(g, c)
        if g > 1:
            num = [c // g for c in num]
            den //= g
        if not any(num):
            den = 1
        self.order = order
        self.num = tuple(num)
        self.den = den

    @classmethod
    def rational(cls, m, value):
        value = Fraction(value)
        phi = int(totient(m))
        return cls(m, [value.numerator] + [0] * (phi - 1), value.denominator)

    @classmethod
    def zero(cls, m):
        return cls.rational(m, 0)

    @classmethod
    def one(cls, m):
        return cls.rational(m, 1)

    @classmethod
    def from_fractions(cls, m, coeffs):
        coeffs = [Fraction(c) for c in coeffs]
        den = 1
        for c in coeffs:
            den = den * c.denominator // math.gcd(den, c.denominator)
        return cls(m, [int(c * den) for c in coeffs], den)

    @classmethod
    def from_exponent_counts(cls, m, counts, den=1):
        """sum_k counts[k] xi_m^k for an integer vector of length m."""
        counts = np.asarray(counts)
        if counts.shape != (m,):
            raise ValueError(f"Expected {m} exponent counts, got shape {counts.shape}.")
        if counts.dtype == object or np.abs(counts).max(initial=0) > 2**40:
            vec = _reduce(m, [int(c) for c in counts])
        else:
            vec = [int(v) for v in counts.astype(np.int64) @ power_table(m)]
        return cls(m, vec, den)

    @property
    def phi(self):
        return len(self.num)

    @property
    def coeffs(self):
        return tuple(Fraction(c, self.den) for c in self.num)

    def is_zero(self):
        return not any(self.num)

    def is_rational(self):
        return not any(self.num[1:])

    def rational_value(self):
        if not self.is_rational():
            raise ValueError(f"{self} is not rational.")
        return Fraction(self.num[0], self.den)

    def _lift(self, other):
        value = _coerce_rational(other)
        if value is not None:
            return CycNum.rational(self.order, value)
        if isinstance(other, CycNum):
            if other.order != self.order:
                raise ValueError(
                    f"Cyclotomic orders differ ({self.order} vs {other.order}); raise_order first."
                )
            return other
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        num = [a * other.den + b * self.den for a, b in zip(self.num, other.num)]
        return CycNum(self.order, num, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return CycNum(self.order, [-c for c in self.num], self.den)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        value = _coerce_rational(other)
        if value is not None:
            return CycNum(
                self.order,
                [c * value.numerator for c in self.num],
                self.den * value.denominator,
            )
        other = self._lift(other)
        if other is NotImplemented:
            return other
        full = [0] * (2 * self.phi - 1)
        for i, a in enumerate(self.num):
            if a:
                for j, b in enumerate(other.num):
                    if b:
                        full[i + j] += a * b
        return CycNum(self.order, full, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        value = _coerce_rational(other)
        if value is not None:
            if value == 0:
                raise ZeroDivisionError("Division of a cyclotomic number by zero.")
            return self * (1 / value)
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, exponent):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = CycNum.one(self.order)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other):
        value = _coerce_rational(other)
        if value is not None:
            return self.is_rational() and self.rational_value() == value
        if not isinstance(other, CycNum):
            return NotImplemented
        if other.order != self.order:
            m = math.lcm(self.order, other.order)
            return self.raise_order(m) == other.raise_order(m)
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash(self.mean_trace())

    def mean_trace(self):
        """Tr(self) / phi(order), independent of the order self is written in."""
        weights = _trace_weights(self.order)
        return sum((Fraction(c) * w for c, w in zip(self.num, weights) if c), Fraction(0)) / self.den

    def galois(self, k):
        """Automorphism xi_m -> xi_m^k for k prime to m."""
        m = self.order
        if math.gcd(k, m) != 1:
            raise ValueError(f"Exponent {k} is not a unit modulo {m}.")
        full = [0] * m
        for j, c in enumerate(self.num):
            if c:
                full[(j * k) % m] += c
        return CycNum(m, full, self.den)

    def conj(self):
        return self.galois(-1)

    def norm(self):
        """Absolute norm to Q."""
        result = self
        for k in range(2, self.order):
            if math.gcd(k, self.order) == 1:
                result = result * self.galois(k)
        return result.rational_value()

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("Zero has no inverse.")
        if self.is_rational():
            return CycNum.rational(self.order, 1 / self.rational_value())
        product = CycNum.one(self.order)
        for k in range(2, self.order):
            if math.gcd(k, self.order) == 1:
                product = product * self.galois(k)
        norm = (self * product).rational_value()
        return product * (1 / norm)

    def raise_order(self, m):
        if m % self.order:
            raise ValueError(f"Cannot embed Q(xi_{self.order}) into Q(xi_{m}).")
        step = m // self.order
        full = [0] * m
        for j, c in enumerate(self.num):
            if c:
                full[(j * step) % m] += c
        return CycNum(m, full, self.den)

    def lower_order(self, m):
        """Express self in Q(xi_m); ValueError when it is not there."""
        if self.order % m:
            raise ValueError(f"Q(xi_{m}) is not a subfield of Q(xi_{self.order}).")
        if m == self.order:
            return self
        step = self.order // m
        phi_small = int(totient(m))
        basis = [CycNum.root_of_unity(self.order, j * step) for j in range(phi_small)]
        pivots = [j * step for j in range(phi_small)]
        if all(b.num[p] == 1 and sum(map(abs, b.num)) == 1 for b, p in zip(basis, pivots)):
            coords = [Fraction(self.num[p], self.den) for p in pivots]
        else:
            matrix = sympy.Matrix([[Fraction(c, b.den) for c in b.num] for b in basis]).T
            target = sympy.Matrix([Fraction(c, self.den) for c in self.num])
            try:
                solution, params = matrix.gauss_jordan_solve(target)
            except ValueError:
                raise ValueError(f"{self} does not lie in Q(xi_{m}).")
            coords = [_coerce_rational(v) for v in solution]
        candidate = CycNum.from_fractions(m, coords)
        if candidate.raise_order(self.order) != self:
            raise ValueError(f"{self} does not lie in Q(xi_{m}).")
        return candidate

    @classmethod
    def root_of_unity(cls, m, k):
        if m < 1:
            raise ValueError(f"Root of unity order must be positive, got {m}.")
        full = [0] * m
        full[k % m] = 1
        return cls(m, full)

    def serialize(self):
        return f"{self.order}:[{','.join(str(c) for c in self.coeffs)}]"

    @classmethod
    def parse(cls, text):
        try:
            head, body = text.strip().split(":", 1)
            body = body.strip()
            if not (body.startswith("[") and body.endswith("]")):
                raise ValueError
            items = [s for s in body[1:-1].split(",") if s.strip()]
            return cls.from_fractions(int(head), [Fraction(s.strip()) for s in items])
        except ValueError:
            raise ValueError(f"Malformed cyclotomic literal {text!r}.")

    def __repr__(self):
        return self.serialize()


def root_of_unity(m, k):
    return CycNum.root_of_unity(m, k)


class HalfPowNum:
    """even + odd * q^(-1/2) with CycNum components of a common order."""

    __slots__ = ("q", "even", "odd")

    def __init__(self, q, even, odd=None):
        if not isinstance(even, CycNum):
            raise TypeError("HalfPowNum components must be CycNum values.")
        if odd is None:
            odd = CycNum.zero(even.order)
        if odd.order != even.order:
            raise ValueError("HalfPowNum components must share a cyclotomic order.")
        root = sqrt_in_order(q, even.order) if not odd.is_zero() else None
        if root is not None:
            # odd * q^(-1/2) = odd * sqrt(q) / q inside Q(xi_m)
            even = even + odd * root * Fraction(1, q)
            odd = CycNum.zero(even.order)
        self.q = q
        self.even = even
        self.odd = odd

    @property
    def order(self):
        return self.even.order

    @classmethod
    def from_power(cls, q, value, n):
        """value * q^(-n/2) for an integer n."""
        if n % 2 == 0:
            return cls(q, value * Fraction(1, q) ** (n // 2) if n >= 0 else value * q ** (-n // 2))
        zero = CycNum.zero(value.order)
        k = (n - 1) // 2
        scale = Fraction(1, q**k) if k >= 0 else Fraction(q ** (-k))
        return cls(q, zero, value * scale)

    def _lift(self, other):
        if isinstance(other, HalfPowNum):
            if other.q != self.q:
                raise ValueError(f"HalfPowNum bases differ ({self.q} vs {other.q}).")
            return other
        if isinstance(other, CycNum) or _coerce_rational(other) is not None:
            return HalfPowNum(self.q, self.even * 0 + other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return HalfPowNum(self.q, self.even + other.even, self.odd + other.odd)

    __radd__ = __add__

    def __neg__(self):
        return HalfPowNum(self.q, -self.even, -self.odd)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        even = self.even * other.even + self.odd * other.odd * Fraction(1, self.q)
        odd = self.even * other.odd + self.odd * other.even
        return HalfPowNum(self.q, even, odd)

    __rmul__ = __mul__

    def conj(self):
        return HalfPowNum(self.q, self.even.conj(), self.odd.conj())

    def is_zero(self):
        return self.even.is_zero() and self.odd.is_zero()

    def __eq__(self, other):
        if isinstance(other, CycNum):
            other = HalfPowNum(self.q, other)
        elif _coerce_rational(other) is not None:
            other = HalfPowNum(self.q, CycNum.rational(self.order, other))
        if not isinstance(other, HalfPowNum):
            return NotImplemented
        if self.q != other.q:
            return False
        if self.order != other.order:
            m = math.lcm(self.order, other.order)
            return self.raise_order(m) == other.raise_order(m)
        return self.even == other.even and self.odd == other.odd

    def __hash__(self):
        # odd part is zero once sqrt(q) is in the field
        m = math.lcm(self.order, sqrt_conductor(self.q))
        return hash(self.raise_order(m).even)

    def lower_order(self, m):
        return HalfPowNum(self.q, self.even.lower_order(m), self.odd.lower_order(m))

    def raise_order(self, m):
        return HalfPowNum(self.q, self.even.raise_order(m), self.odd.raise_order(m))

    def serialize(self):
        return f"{self.q}:{self.even.serialize()}|{self.odd.serialize()}"

    @classmethod
    def parse(cls, text):
        try:
            head, rest = text.strip().split(":", 1)
            even, odd = rest.split("|")
            return cls(int(head), CycNum.parse(even), CycNum.parse(odd))
        except ValueError:
            raise ValueError(f"Malformed half-power literal {text!r}.")

    def __repr__(self):
        return self.serialize()


class ComplexApprox:
    """Complex float with a radius bound."""

    __slots__ = ("re", "im", "err")

    def __init__(self, re, im=0.0, err=0.0):
        self.re = float(re)
        self.im = float(im)
        self.err = float(err)

    @classmethod
    def real(cls, value, err=0.0):
        return cls(value, 0.0, abs(value) * EPS + err)

    @property
    def value(self):
        return complex(self.re, self.im)

    def __abs__(self):
        return abs(self.value)

    def _lift(self, other):
        if isinstance(other, ComplexApprox):
            return other
        if isinstance(other, (int, float, Fraction)):
            return ComplexApprox(float(other), 0.0, 0.0)
        if isinstance(other, complex):
            return ComplexApprox(other.real, other.imag, 0.0)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        z = self.value + other.value
        return ComplexApprox(z.real, z.imag, self.err + other.err + abs(z) * EPS)

    __radd__ = __add__

    def __neg__(self):
        return ComplexApprox(-self.re, -self.im, self.err)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        z = self.value * other.value
        err = abs(self) * other.err + abs(other) * self.err + self.err * other.err
        return ComplexApprox(z.real, z.imag, err + 2 * abs(z) * EPS)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        denom = abs(other) - other.err
        if denom <= 0:
            raise ZeroDivisionError("Divisor interval contains zero.")
        z = self.value / other.value
        err = (self.err + abs(z) * other.err) / denom
        return ComplexApprox(z.real, z.imag, err + 2 * abs(z) * EPS)

    def __rtruediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other / self

    def conj(self):
        return ComplexApprox(self.re, -self.im, self.err)

    def close_to(self, other, tol=0.0):
        other = self._lift(other)
        return abs(self.value - other.value) <= self.err + other.err + tol

    def to_json(self):
        return {"re": self.re, "im": self.im, "err": self.err}

    def __repr__(self):
        return f"({self.re!r}{self.im:+.17g}i ± {self.err:.3g})"


def embed_complex(x):
    """Evaluate at xi_m = exp(2 pi i / m) and q^(-1/2) > 0."""
    if isinstance(x, HalfPowNum):
        even = embed_complex(x.even)
        odd = embed_complex(x.odd)
        return even + odd * ComplexApprox.real(x.q ** -0.5)
    if isinstance(x, ThirdPowNum):
        return embed_complex(x.value) * ComplexApprox.real(float(x.q) ** (x.t / 3))
    if _coerce_rational(x) is not None:
        return ComplexApprox.real(float(x))
    m = x.order
    coeffs = np.array([float(c) for c in x.coeffs])
    roots = np.exp(2j * np.pi * np.arange(len(coeffs)) / m)
    z = complex(np.dot(coeffs, roots))
    err = 4 * (len(coeffs) + 1) * EPS * float(np.abs(coeffs).sum())
    return ComplexApprox(z.real, z.imag, err)


class ThirdPowNum:
    """value * q^(t/3)."""

    __slots__ = ("q", "value", "t")

    def __init__(self, q, value, t=0):
        self.q = q
        self.value = value
        self.t = 0 if value.is_zero() else int(t)

    def __mul__(self, other):
        if isinstance(other, ThirdPowNum):
            return ThirdPowNum(self.q, self.value * other.value, self.t + other.t)
        return ThirdPowNum(self.q, self.value * other, self.t)

    __rmul__ = __mul__

    def _aligned(self, other):
        if self.value.is_zero() or other.value.is_zero():
            return self.value, other.value, self.t if other.value.is_zero() else other.t
        if (self.t - other.t) % 3:
            raise ValueError(
                f"Exponents q^({self.t}/3) and q^({other.t}/3) do not combine integrally."
            )
        t = min(self.t, other.t)
        a = self.value * self.q ** ((self.t - t) // 3)
        b = other.value * other.q ** ((other.t - t) // 3)
        return a, b, t

    def __add__(self, other):
        if not isinstance(other, ThirdPowNum):
            other = ThirdPowNum(self.q, self.value * 0 + other)
        a, b, t = self._aligned(other)
        return ThirdPowNum(self.q, a + b, t)

    def __neg__(self):
        return ThirdPowNum(self.q, -self.value, self.t)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, ThirdPowNum):
            other = ThirdPowNum(self.q, self.value * 0 + other)
        a, b, _ = self._aligned(other)
        return a == b

    __hash__ = None

    def to_cyc(self):
        if self.t % 3:
            raise ValueError(f"q^({self.t}/3) is not an integral power of q.")
        k = self.t // 3
        return self.value * (Fraction(self.q) ** k)

    def __repr__(self):
        return f"{self.value.serialize()}*{self.q}^({self.t}/3)"
