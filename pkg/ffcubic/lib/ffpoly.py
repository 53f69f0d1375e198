import json
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy
from sympy import divisors, factorint, isprime
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_irreducible_p

logger = logging.getLogger(__name__)


def int_mobius(n):
    exponents = factorint(n).values()
    if any(e > 1 for e in exponents):
        return 0
    return -1 if len(exponents) % 2 else 1


def digit_matrix(base, width):
    """Row k holds the base-`base` digits of k, least significant first."""
    k = np.arange(base**width, dtype=np.int64)
    digits = np.empty((k.size, width), dtype=np.int64)
    for i in range(width):
        digits[:, i] = (k // base**i) % base
    return digits


class FieldSpec:
    """F_q with q = p^n; elements are the integers sum a_i p^i < q."""

    def __init__(self, p, n=1):
        if p == 2 or not isprime(p):
            raise ValueError(f"Field characteristic must be an odd prime, got {p}.")
        if n < 1:
            raise ValueError(f"Field degree must be positive, got {n}.")
        self.p = p
        self.n = n
        self.q = p**n
        self.residue_class = self.q % 3
        self.modulus = self._least_irreducible()
        self._build_tables()

    def _least_irreducible(self):
        if self.n == 1:
            return (0, 1)
        for index in range(self.p**self.n):
            low = [(index // self.p**i) % self.p for i in range(self.n)]
            if gf_irreducible_p([1] + low[::-1], self.p, ZZ):
                return tuple(low) + (1,)
        raise RuntimeError(f"No irreducible polynomial of degree {self.n} over F_{self.p}.")

    def _encode(self, digits):
        return digits @ (self.p ** np.arange(self.n, dtype=np.int64))

    def _build_tables(self):
        p, n, q = self.p, self.n, self.q
        digits = digit_matrix(p, n)
        self.digits = digits
        self.add_table = self._encode((digits[:, None, :] + digits[None, :, :]) % p)
        self.neg_table = self._encode((-digits) % p)

        product = np.zeros((q, q, 2 * n - 1), dtype=np.int64)
        for i in range(n):
            for j in range(n):
                product[:, :, i + j] += digits[:, None, i] * digits[None, :, j]
        product %= p
        for k in range(2 * n - 2, n - 1, -1):
            carry = product[:, :, k]
            for i in range(n):
                product[:, :, k - n + i] = (product[:, :, k - n + i] - carry * self.modulus[i]) % p
        self.mul_table = self._encode(product[:, :, :n])

        inv = np.argmax(self.mul_table == 1, axis=1)
        inv[0] = 0
        self.inv_table = inv

        self.add_list = self.add_table.tolist()
        self.mul_list = self.mul_table.tolist()
        self.neg_list = self.neg_table.tolist()
        self.inv_list = self.inv_table.tolist()

        self.gamma = self._least_primitive_root()
        exp = [1] * (q - 1)
        for k in range(1, q - 1):
            exp[k] = self.mul_list[exp[k - 1]][self.gamma]
        dlog = [-1] * q
        for k, a in enumerate(exp):
            dlog[a] = k
        self.exp_list = exp
        self.dlog_list = dlog
        self.exp_table = np.array(exp, dtype=np.int64)
        self.dlog_table = np.array(dlog, dtype=np.int64)

        trace = [0] * q
        for a in range(1, q):
            total = 0
            for i in range(n):
                total = self.add_list[total][self.frobenius(a, i)]
            if total >= p:
                raise RuntimeError(f"Trace of {a} left the prime field.")
            trace[a] = total
        self.trace_list = trace
        self.trace_table = np.array(trace, dtype=np.int64)

        for table in (self.add_table, self.neg_table, self.mul_table, self.inv_table,
                      self.exp_table, self.dlog_table, self.trace_table, self.digits):
            table.setflags(write=False)

    def _least_primitive_root(self):
        primes = list(factorint(self.q - 1))
        for a in range(1, self.q):
            if all(self.power(a, (self.q - 1) // r) != 1 for r in primes):
                return a
        raise RuntimeError(f"No primitive root in F_{self.q}.")

    def add(self, a, b):
        return self.add_list[a][b]

    def sub(self, a, b):
        return self.add_list[a][self.neg_list[b]]

    def neg(self, a):
        return self.neg_list[a]

    def mul(self, a, b):
        return self.mul_list[a][b]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError(f"Zero has no inverse in F_{self.q}.")
        return self.inv_list[a]

    def power(self, a, e):
        result = 1
        while e:
            if e & 1:
                result = self.mul_list[result][a]
            a = self.mul_list[a][a]
            e >>= 1
        return result

    def frobenius(self, a, k=1):
        """a^(p^k)."""
        if a == 0:
            return 0
        return self.exp_list[(self.dlog_list[a] * self.p**k) % (self.q - 1)]

    def trace(self, a):
        return self.trace_list[a]

    def vadd(self, a, b):
        if self.n == 1:
            return (a + b) % self.p
        return self.add_table[a, b]

    def vneg(self, a):
        if self.n == 1:
            return (-a) % self.p
        return self.neg_table[a]

    def vsub(self, a, b):
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b):
        if self.n == 1:
            return (a * b) % self.p
        return self.mul_table[a, b]

    def element_to_json(self, a):
        if self.n == 1:
            return a
        return [int(d) for d in self.digits[a]]

    def element_from_json(self, value):
        if isinstance(value, list):
            if len(value) > self.n or any(not 0 <= int(d) < self.p for d in value):
                raise ValueError(f"{value} is not an element of F_{self.q}.")
            return int(sum(int(d) * self.p**i for i, d in enumerate(value)))
        value = int(value)
        if self.n > 1 and not 0 <= value < self.p:
            raise ValueError(f"Scalar {value} is not in the prime field of F_{self.q}.")
        return value % self.p if self.n == 1 else value

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and (self.p, self.n) == (other.p, other.n)

    def __hash__(self):
        return hash(("FieldSpec", self.p, self.n))

    def __reduce__(self):
        return (field_spec, (self.p, self.n))

    def __repr__(self):
        return f"FieldSpec(q={self.q})"


@lru_cache(maxsize=None)
def field_spec(p, n=1):
    return FieldSpec(p, n)


def field_from_q(q):
    if q < 3:
        raise ValueError(f"q must be an odd prime power, got {q}.")
    factors = factorint(q)
    if len(factors) != 1:
        raise ValueError(f"q must be a prime power, got {q}.")
    ((p, n),) = factors.items()
    if p == 2:
        raise ValueError(f"q must be odd, got {q}.")
    if p == 3:
        raise ValueError(f"q must be prime to 3, got {q}.")
    return field_spec(p, n)


@dataclass(frozen=True)
class Poly:
    """Polynomial over F_q, coefficients from the constant term up."""

    field: FieldSpec
    coeffs: tuple = ()

    def __post_init__(self):
        coeffs = [int(c) for c in self.coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @classmethod
    def const(cls, field, c):
        return cls(field, (c,))

    @classmethod
    def one(cls, field):
        return cls(field, (1,))

    @classmethod
    def T(cls, field):
        return cls(field, (0, 1))

    @classmethod
    def monomial(cls, field, k, c=1):
        return cls(field, (0,) * k + (c,))

    @classmethod
    def from_monic_index(cls, field, d, index):
        q = field.q
        return cls(field, tuple((index // q**i) % q for i in range(d)) + (1,))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def lead(self):
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self):
        return not self.coeffs

    def is_one(self):
        return self.coeffs == (1,)

    def is_monic(self):
        return self.lead == 1

    @property
    def index(self):
        return sum(c * self.field.q**i for i, c in enumerate(self.coeffs))

    @property
    def monic_index(self):
        if not self.is_monic():
            raise ValueError(f"{self} is not monic.")
        return sum(c * self.field.q**i for i, c in enumerate(self.coeffs[:-1]))

    @property
    def norm(self):
        """|f|_q = q^deg f."""
        if self.is_zero():
            return 0
        return self.field.q**self.degree

    def sort_key(self):
        return (self.degree, self.index)

    def _check(self, other):
        if isinstance(other, Poly):
            if other.field != self.field:
                raise ValueError(f"Polynomials over {self.field} and {other.field} do not mix.")
            return other
        if isinstance(other, int):
            return Poly.const(self.field, other)
        return NotImplemented

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        F = self.field
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly(F, [F.add(x, b[i]) if i < len(b) else x for i, x in enumerate(a)])

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.field, [self.field.neg(c) for c in self.coeffs])

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return Poly(self.field)
        F = self.field
        add, mul = F.add_list, F.mul_list
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                row = mul[a]
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[i + j] = add[out[i + j]][row[b]]
        return Poly(F, out)

    __rmul__ = __mul__

    def scale(self, c):
        return Poly(self.field, [self.field.mul(c, x) for x in self.coeffs])

    def __divmod__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("Polynomial division by zero.")
        F = self.field
        add, mul, neg = F.add_list, F.mul_list, F.neg_list
        r = list(self.coeffs)
        db = other.degree
        b = other.coeffs
        inv_lead = F.inv(other.lead)
        quotient = [0] * max(0, len(r) - db)
        for i in range(len(r) - 1, db - 1, -1):
            c = mul[r[i]][inv_lead]
            if not c:
                continue
            quotient[i - db] = c
            nc = neg[c]
            for j in range(db + 1):
                if b[j]:
                    r[i - db + j] = add[r[i - db + j]][mul[nc][b[j]]]
        return Poly(F, quotient), Poly(F, r[:db])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def divides(self, other):
        return (other % self).is_zero()

    def monic(self):
        if self.is_zero():
            raise ValueError("The zero polynomial has no monic associate.")
        return self.scale(self.field.inv(self.lead))

    def derivative(self):
        F = self.field
        out = []
        for i, c in enumerate(self.coeffs[1:], start=1):
            k = i % F.p
            out.append(F.mul(c, k) if k else 0)
        return Poly(F, out)

    def __pow__(self, e):
        result = Poly.one(self.field)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def pow_mod(self, e, modulus):
        result = Poly.one(self.field) % modulus
        base = self % modulus
        while e:
            if e & 1:
                result = (result * base) % modulus
            base = (base * base) % modulus
            e >>= 1
        return result

    def evaluate(self, a):
        F = self.field
        value = 0
        for c in reversed(self.coeffs):
            value = F.add(F.mul(value, a), c)
        return value

    def frobenius(self, k=1):
        """Raise every coefficient to the p^k-th power."""
        return Poly(self.field, [self.field.frobenius(c, k) for c in self.coeffs])

    def to_json(self):
        return [self.field.element_to_json(c) for c in self.coeffs]

    def to_text(self):
        return f"q={self.field.q};" + json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def parse(cls, text, field=None):
        """Read "q=25;[c0,...]", "[c0,...]" or an expression in T over a prime field."""
        text = text.strip()
        if text.startswith("q="):
            head, _, text = text.partition(";")
            try:
                parsed = field_from_q(int(head[2:]))
            except ValueError as error:
                raise ValueError(f"Malformed polynomial literal: {error}")
            if field is not None and field != parsed:
                raise ValueError(f"Literal is over F_{parsed.q}, expected F_{field.q}.")
            field = parsed
        if field is None:
            raise ValueError(f"Polynomial literal {text!r} needs a field.")
        try:
            if text.startswith("["):
                values = json.loads(text)
                return cls(field, [field.element_from_json(v) for v in values])
            if field.n != 1:
                raise ValueError("expressions in T need a prime field")
            T = sympy.Symbol("T")
            expr = sympy.Poly(sympy.sympify(text, locals={"T": T}), T)
            return cls(field, [int(c) % field.p for c in expr.all_coeffs()[::-1]])
        except (ValueError, TypeError, sympy.SympifyError, sympy.PolynomialError) as error:
            raise ValueError(f"Malformed polynomial literal {text!r}: {error}")

    def __repr__(self):
        return self.to_text()


@dataclass(frozen=True)
class CubeDecomposition:
    """f = E^3 B^2 C with B, C squarefree and coprime."""

    E: Poly
    B: Poly
    C: Poly

    def reconstruct(self):
        return self.E**3 * self.B**2 * self.C


def gcd(a, b):
    if a.is_zero() and b.is_zero():
        raise ValueError("gcd(0, 0) is undefined.")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def enumerate_monic(field, d, squarefree=False):
    if squarefree:
        mask = factor_table(field, d).squarefree[d]
        for index in np.flatnonzero(mask):
            yield Poly.from_monic_index(field, d, int(index))
        return
    for index in range(field.q**d):
        yield Poly.from_monic_index(field, d, index)


@lru_cache(maxsize=64)
def monic_matrix(field, d):
    """All monic polynomials of degree d as coefficient rows, in index order."""
    rows = np.ones((field.q**d, d + 1), dtype=np.int64)
    if d:
        rows[:, :d] = digit_matrix(field.q, d)
    rows.setflags(write=False)
    return rows


def rows_index(field, rows):
    width = rows.shape[1]
    return rows @ (field.q ** np.arange(width, dtype=np.int64))


def mul_rows(field, a, b):
    """Row-wise product of two coefficient batches."""
    out = np.zeros((max(a.shape[0], b.shape[0]), a.shape[1] + b.shape[1] - 1), dtype=np.int64)
    for i in range(a.shape[1]):
        for j in range(b.shape[1]):
            out[:, i + j] = field.vadd(out[:, i + j], field.vmul(a[:, i], b[:, j]))
    return out


def reduce_rows(field, rows, modulus):
    """Remainders of each coefficient row modulo a monic polynomial, shape (N, deg)."""
    e = modulus.degree
    if not modulus.is_monic() or e < 1:
        raise ValueError(f"Row reduction needs a monic modulus of positive degree, got {modulus}.")
    rows = np.array(rows, dtype=np.int64)
    if rows.ndim == 1:
        rows = rows[None, :]
    if rows.shape[1] < e:
        rows = np.hstack([rows, np.zeros((rows.shape[0], e - rows.shape[1]), dtype=np.int64)])
    m = modulus.coeffs
    for j in range(rows.shape[1] - 1, e - 1, -1):
        c = rows[:, j]
        if not c.any():
            continue
        for i in range(e):
            if m[i]:
                rows[:, j - e + i] = field.vsub(rows[:, j - e + i], field.vmul(c, m[i]))
    return rows[:, :e]


class FactorTable:
    """Smallest-prime-factor sieve over every monic polynomial of degree <= max_degree.

    Primes are ordered by (degree, index); for each monic F of degree d the table stores
    the smallest prime P | F and the index of F / P, from which squarefreeness, omega
    and mu follow by a degree-ascending pass.
    """

    def __init__(self, field, max_degree):
        self.field = field
        self.max_degree = 0
        self.spf_degree = [np.zeros(1, dtype=np.int8)]
        self.spf_index = [np.zeros(1, dtype=np.int64)]
        self.cofactor = [np.zeros(1, dtype=np.int64)]
        self.squarefree = [np.ones(1, dtype=bool)]
        self.omega = [np.zeros(1, dtype=np.int8)]
        self.mobius = [np.ones(1, dtype=np.int8)]
        self._primes = {}
        self.extend(max_degree)

    def extend(self, max_degree):
        for d in range(self.max_degree + 1, max_degree + 1):
            self._sieve_degree(d)
            self.max_degree = d

    def _sieve_degree(self, d):
        field = self.field
        size = field.q**d
        spf_degree = np.zeros(size, dtype=np.int8)
        spf_index = np.zeros(size, dtype=np.int64)
        cofactor = np.zeros(size, dtype=np.int64)
        for e in range(1, d // 2 + 1):
            cofactors = monic_matrix(field, d - e)
            for p_index in np.flatnonzero(self.spf_degree[e] == e):
                prime = monic_matrix(field, e)[p_index]
                product = mul_rows(field, cofactors, prime[None, :])
                target = rows_index(field, product[:, :d])
                fresh = spf_degree[target] == 0
                spf_degree[target[fresh]] = e
                spf_index[target[fresh]] = p_index
                cofactor[target[fresh]] = np.flatnonzero(fresh)
        prime_mask = spf_degree == 0
        spf_degree[prime_mask] = d
        spf_index[prime_mask] = np.flatnonzero(prime_mask)

        squarefree = np.empty(size, dtype=bool)
        omega = np.empty(size, dtype=np.int8)
        for e in np.unique(spf_degree):
            sel = spf_degree == e
            rest = cofactor[sel]
            r = d - e
            repeated = (self.spf_degree[r][rest] == e) & (self.spf_index[r][rest] == spf_index[sel])
            if r == 0:
                repeated[:] = False
            squarefree[sel] = self.squarefree[r][rest] & ~repeated
            omega[sel] = self.omega[r][rest] + (~repeated).astype(np.int8)
        mobius = np.where(squarefree, np.where(omega % 2 == 1, -1, 1), 0).astype(np.int8)

        self.spf_degree.append(spf_degree)
        self.spf_index.append(spf_index)
        self.cofactor.append(cofactor)
        self.squarefree.append(squarefree)
        self.omega.append(omega)
        self.mobius.append(mobius)

    def prime_indices(self, d):
        return np.flatnonzero(self.spf_degree[d] == d)

    def primes(self, d):
        if d not in self._primes:
            self._primes[d] = [
                Poly.from_monic_index(self.field, d, int(i)) for i in self.prime_indices(d)
            ]
        return self._primes[d]

    def factor_index(self, d, index):
        """[(degree, prime index, exponent), ...] for the monic polynomial (d, index)."""
        out = []
        while d > 0:
            e = int(self.spf_degree[d][index])
            p_index = int(self.spf_index[d][index])
            index = int(self.cofactor[d][index])
            d -= e
            if out and out[-1][0] == e and out[-1][1] == p_index:
                out[-1][2] += 1
            else:
                out.append([e, p_index, 1])
        return [tuple(item) for item in out]


_FACTOR_TABLES = {}


def factor_table(field, max_degree):
    table = _FACTOR_TABLES.get(field)
    if table is None:
        table = _FACTOR_TABLES[field] = FactorTable(field, 0)
    if table.max_degree < max_degree:
        logger.debug("Sieving monic polynomials over F_%d up to degree %d", field.q, max_degree)
        table.extend(max_degree)
    return table


def cached_factor_table(field):
    return _FACTOR_TABLES.get(field)


def factor(f):
    """Monic irreducible factors of f with exponents, sorted by (degree, index).

    The leading coefficient is not part of the result; f.lead times the product
    of the factors reconstructs f.
    """
    if f.is_zero():
        raise ValueError("Cannot factor the zero polynomial.")
    g = f.monic()
    if g.degree == 0:
        return []
    table = cached_factor_table(f.field)
    if table is not None and table.max_degree >= g.degree:
        return [
            (Poly.from_monic_index(f.field, e, i), k)
            for e, i, k in table.factor_index(g.degree, g.monic_index)
        ]
    table = factor_table(f.field, max(1, g.degree // 2))
    out = []
    for e in range(1, g.degree // 2 + 1):
        if 2 * e > g.degree:
            break
        for prime in table.primes(e):
            if 2 * e > g.degree:
                break
            k = 0
            while True:
                quotient, rem = divmod(g, prime)
                if not rem.is_zero():
                    break
                g = quotient
                k += 1
            if k:
                out.append((prime, k))
    if g.degree > 0:
        out.append((g, 1))
    return sorted(out, key=lambda item: item[0].sort_key())


def is_irreducible(f):
    if f.is_zero():
        raise ValueError("The zero polynomial is not irreducible.")
    if f.degree < 1:
        return False
    f = f.monic()
    T = Poly.T(f.field)
    h = T % f
    for _ in range(f.degree // 2):
        h = h.pow_mod(f.field.q, f)
        if gcd(f, h - T).degree > 0:
            return False
    return True


def is_squarefree(f):
    if f.is_zero():
        return False
    if f.degree < 1:
        return True
    return gcd(f, f.derivative()).degree == 0


def count_irreducibles(field, d):
    if d < 1:
        raise ValueError(f"Degree must be positive, got {d}.")
    q = field.q if isinstance(field, FieldSpec) else int(field)
    return sum(int_mobius(e) * q ** (d // e) for e in divisors(d)) // d


def mobius(f):
    factors = factor(f)
    if any(k > 1 for _, k in factors):
        return 0
    return -1 if len(factors) % 2 else 1


def euler_phi(f):
    result = 1
    for prime, k in factor(f):
        result *= prime.norm**k - prime.norm ** (k - 1)
    return result


def omega_count(f):
    return len(factor(f))


def cube_decompose(f):
    field = f.field
    E = B = C = Poly.one(field)
    for prime, k in factor(f):
        E = E * prime ** (k // 3)
        if k % 3 == 2:
            B = B * prime
        elif k % 3 == 1:
            C = C * prime
    return CubeDecomposition(E, B, C)


class QuadraticExtension:
    """F_{q^2} as the flat field F_{p^(2n)} with F_q embedded through a root of its modulus."""

    def __init__(self, base):
        self.base = base
        self.big = field_spec(base.p, 2 * base.n)
        if base.n == 1:
            root = None
            embed = list(range(base.p))
        else:
            modulus = Poly(self.big, base.modulus)
            root = next(a for a in range(self.big.q) if modulus.evaluate(a) == 0)
            powers = [1]
            for _ in range(1, base.n):
                powers.append(self.big.mul(powers[-1], root))
            embed = []
            for a in range(base.q):
                value = 0
                for i, digit in enumerate(base.digits[a]):
                    value = self.big.add(value, self.big.mul(int(digit), powers[i]))
                embed.append(value)
        self.root = root
        self.embed_list = embed
        self.embed_table = np.array(embed, dtype=np.int64)
        self.restrict_map = {b: a for a, b in enumerate(embed)}

    def embed(self, f):
        return Poly(self.big, [self.embed_list[c] for c in f.coeffs])

    def restrict(self, F):
        try:
            return Poly(self.base, [self.restrict_map[c] for c in F.coeffs])
        except KeyError:
            raise ValueError(f"{F} does not have coefficients in F_{self.base.q}.")

    def conjugate(self, F):
        """Apply x -> x^q to every coefficient."""
        return F.frobenius(self.base.n)

    def norm_poly(self, F):
        """F * conj(F), mapped back to F_q[T]."""
        return self.restrict(F * self.conjugate(F))


@lru_cache(maxsize=None)
def quadratic_extension(base):
    return QuadraticExtension(base)
