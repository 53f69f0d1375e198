import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sympy import factorint

from ffcubic.lib.cyclotomic import CycNum
from ffcubic.lib.ffpoly import (
    Poly,
    factor_table,
    is_irreducible,
    monic_matrix,
    mul_rows,
    quadratic_extension,
    reduce_rows,
    rows_index,
)

KUMMER = "kummer"
NONKUMMER = "nonkummer"
SETTINGS = (KUMMER, NONKUMMER)


class OmegaIso:
    """The isomorphism from the cube roots of unity onto the order-3 subgroup of F_q^*.

    The canonical choice sends xi_3 to gamma^((q-1)/3) for the least primitive root
    gamma; the conjugate choice sends it to gamma^(2(q-1)/3).
    """

    def __init__(self, field, conjugate=False):
        if field.q % 3 != 1:
            raise ValueError(f"Cubic residue symbols need q = 1 mod 3, got q = {field.q}.")
        self.field = field
        self.conjugate = conjugate
        self.step = 2 if conjugate else 1
        self.generator_image = field.exp_list[self.step * (field.q - 1) // 3]
        dlog = field.dlog_table
        self.class_table = np.where(dlog >= 0, (dlog * self.step) % 3, -1).astype(np.int8)
        self.class_table.setflags(write=False)
        self.class_list = self.class_table.tolist()

    def cube_class(self, a):
        """k with a^((q-1)/3) = Omega(xi_3)^k, or None for a = 0."""
        k = self.class_list[a]
        return None if k < 0 else k

    def __eq__(self, other):
        return (
            isinstance(other, OmegaIso)
            and self.field == other.field
            and self.conjugate == other.conjugate
        )

    def __hash__(self):
        return hash(("OmegaIso", self.field, self.conjugate))

    def __reduce__(self):
        return (omega_iso, (self.field, self.conjugate))

    def __repr__(self):
        return f"OmegaIso(q={self.field.q}, conjugate={self.conjugate})"


@lru_cache(maxsize=None)
def omega_iso(field, conjugate=False):
    return OmegaIso(field, conjugate)


def class_to_cyc(k, order=3):
    """xi_3^k inside Q(xi_order), zero for None."""
    if k is None:
        return CycNum.zero(order)
    return CycNum.root_of_unity(order, (k % 3) * (order // 3))


def chi3(iso, a):
    return class_to_cyc(iso.cube_class(a))


def residue_class(iso, P, a):
    """Class of the cubic residue symbol of a modulo the prime P, by its definition."""
    if not is_irreducible(P):
        raise ValueError(f"{P} is not irreducible.")
    P = P.monic()
    r = a % P
    if r.is_zero():
        return None
    power = r.pow_mod((iso.field.q**P.degree - 1) // 3, P)
    if power.degree != 0:
        raise RuntimeError(f"Euler criterion left F_q for {a} modulo {P}.")
    return iso.cube_class(power.lead)


def residue_symbol(iso, P, a):
    return class_to_cyc(residue_class(iso, P, a))


def _rem_monic(field, a, f):
    """Remainder of the coefficient list a modulo the monic coefficient list f."""
    add, mul, neg = field.add_list, field.mul_list, field.neg_list
    r = list(a)
    db = len(f) - 1
    for i in range(len(r) - 1, db - 1, -1):
        c = r[i]
        if c:
            nc = mul[neg[c]]
            for j in range(db):
                if f[j]:
                    r[i - db + j] = add[r[i - db + j]][nc[f[j]]]
    r = r[:db]
    while r and r[-1] == 0:
        r.pop()
    return r


def chi_class_coeffs(iso, f, a):
    """chi_class on raw coefficient lists (f monic, low to high)."""
    field = iso.field
    classes, mul, inv = iso.class_list, field.mul_list, field.inv_list
    e = 0
    while len(f) > 1:
        a = _rem_monic(field, a, f)
        if not a:
            return None
        c = a[-1]
        e += classes[c] * (len(f) - 1)
        if c != 1:
            row = mul[inv[c]]
            a = [row[x] for x in a]
        f, a = a, f
    return e % 3


def chi_class(iso, F, a):
    """Class of chi_F(a) for any monic F, through Euclid and cubic reciprocity.

    chi_F(c) = chi_3(c)^deg F on constants, and chi_A(B) = chi_B(A) for coprime monic A, B
    since q = 1 mod 6.
    """
    if not F.is_monic():
        raise ValueError(f"Residue symbol modulus {F} must be monic.")
    return chi_class_coeffs(iso, list(F.coeffs), list(a.coeffs))


def chi_F(iso, F, a):
    return class_to_cyc(chi_class(iso, F, a))


def e_q_exponent(num, den):
    """tr(a_1) for a_1 the coefficient of 1/T in the Laurent expansion of num/den."""
    if den.is_zero():
        raise ValueError("e_q needs a nonzero denominator.")
    field = den.field
    r = num % den
    if r.is_zero() or r.degree != den.degree - 1:
        return 0
    return field.trace(field.mul(r.lead, field.inv(den.lead)))


def e_q(num, den, order=None):
    field = den.field
    order = order or field.p
    if order % field.p:
        raise ValueError(f"Order {order} is not a multiple of p = {field.p}.")
    return CycNum.root_of_unity(order, e_q_exponent(num, den) * (order // field.p))


def _group_generator(field, P):
    e = P.degree
    order = field.q**e - 1
    primes = list(factorint(order))
    one = Poly.one(field)
    for index in range(1, field.q**e):
        g = Poly(field, [(index // field.q**i) % field.q for i in range(e)])
        if all(g.pow_mod(order // r, P) != one for r in primes):
            return g
    raise RuntimeError(f"No generator of the unit group modulo {P}.")


@lru_cache(maxsize=4096)
def prime_class_table(iso, P):
    """int8 class of chi_P on every residue index modulo the prime P, -1 on zero."""
    field = iso.field
    e = P.degree
    size = field.q**e
    order = size - 1
    g = _group_generator(field, P)
    top = g.pow_mod(order // 3, P)
    step = iso.cube_class(top.lead)

    baby_count = math.isqrt(order - 1) + 1
    baby = np.zeros((baby_count, e), dtype=np.int64)
    power = Poly.one(field)
    for i in range(baby_count):
        baby[i, : len(power.coeffs)] = power.coeffs
        power = (power * g) % P
    giant = power
    exponents = np.arange(baby_count, dtype=np.int64)

    table = np.full(size, -1, dtype=np.int8)
    block = Poly.one(field)
    start = 0
    while start < order:
        row = np.zeros((1, e), dtype=np.int64)
        row[0, : len(block.coeffs)] = block.coeffs
        values = reduce_rows(field, mul_rows(field, baby, row), P)
        keep = start + exponents < order
        table[rows_index(field, values[keep])] = ((start + exponents[keep]) * step) % 3
        block = (block * giant) % P
        start += baby_count
    table.setflags(write=False)
    return table


def classes_mod_prime(iso, P, rows):
    """Classes of chi_P on a batch of coefficient rows."""
    return prime_class_table(iso, P)[rows_index(iso.field, reduce_rows(iso.field, rows, P))]


def classes_mod(iso, factors, rows):
    """Classes of chi_f on coefficient rows for f = prod P^k, -1 where not coprime."""
    total = np.zeros(rows.shape[0], dtype=np.int64)
    dead = np.zeros(rows.shape[0], dtype=bool)
    for prime, k in factors:
        cls = classes_mod_prime(iso, prime, rows)
        dead |= cls < 0
        total += k * cls.astype(np.int64)
    return np.where(dead, -1, total % 3).astype(np.int8)


@dataclass(frozen=True)
class CubicCharacter:
    """Primitive cubic Dirichlet character over F_q[T].

    Kummer characters are chi_{F1} * conj(chi_{F2}) over F_q; non-Kummer characters are
    chi_F for F over F_{q^2}, restricted to F_q[T].
    """

    setting: str
    field: object
    F1: Poly = None
    F2: Poly = None
    F: Poly = None
    conjugate: bool = False

    def __post_init__(self):
        if self.setting == KUMMER:
            if self.field.q % 3 != 1:
                raise ValueError(f"Kummer characters need q = 1 mod 3, got q = {self.field.q}.")
            if self.F1 is None or self.F2 is None:
                raise ValueError("Kummer characters need both F1 and F2.")
        elif self.setting == NONKUMMER:
            if self.field.q % 3 != 2:
                raise ValueError(f"Non-Kummer characters need q = 2 mod 3, got q = {self.field.q}.")
            if self.F is None:
                raise ValueError("Non-Kummer characters need F over F_{q^2}.")
        else:
            raise ValueError(f"Unknown setting {self.setting!r}.")

    @property
    def extension(self):
        return quadratic_extension(self.field)

    @property
    def iso(self):
        if self.setting == KUMMER:
            return omega_iso(self.field, self.conjugate)
        return omega_iso(self.extension.big, self.conjugate)

    @property
    def conductor(self):
        if self.setting == KUMMER:
            return self.F1 * self.F2
        return self.extension.norm_poly(self.F)

    @property
    def restriction(self):
        """Exponent r with chi(c) = chi_3(c)^r on F_q^*."""
        if self.setting == NONKUMMER:
            return 0
        return (self.F1.degree + 2 * self.F2.degree) % 3

    @property
    def parity(self):
        return "even" if self.restriction == 0 else "odd"

    @property
    def is_even(self):
        return self.restriction == 0

    @property
    def genus(self):
        deg_h = self.conductor.degree
        return deg_h - 2 if self.is_even else deg_h - 1

    def value_class(self, a):
        if self.setting == KUMMER:
            c1 = chi_class(self.iso, self.F1, a)
            c2 = chi_class(self.iso, self.F2, a)
            if c1 is None or c2 is None:
                return None
            return (c1 - c2) % 3
        return chi_class(self.iso, self.F, self.extension.embed(a))

    def __call__(self, a):
        return class_to_cyc(self.value_class(a))

    def conj(self):
        if self.setting == KUMMER:
            return CubicCharacter(KUMMER, self.field, F1=self.F2, F2=self.F1, conjugate=self.conjugate)
        return CubicCharacter(
            NONKUMMER, self.field, F=self.extension.conjugate(self.F), conjugate=self.conjugate
        )

    def descriptor(self):
        out = {
            "setting": self.setting,
            "q": self.field.q,
            "conductor": self.conductor.to_text(),
            "genus": self.genus,
            "parity": self.parity,
            "restriction": ["trivial", "chi_3", "chi_3^2"][self.restriction],
        }
        if self.setting == KUMMER:
            out["F1"] = self.F1.to_text()
            out["F2"] = self.F2.to_text()
        else:
            out["F"] = self.F.to_text()
        return out


def kummer_blocks(g):
    """(d1, d2) with d1 + d2 = g + 1 and d1 + 2 d2 = 1 mod 3."""
    return [(d1, g + 1 - d1) for d1 in range(g + 2) if (d1 + 2 * (g + 1 - d1)) % 3 == 1]


def squarefree_with_primes(field, d):
    """[(monic index, frozenset of prime keys)] for every squarefree monic of degree d."""
    table = factor_table(field, d)
    out = []
    for index in np.flatnonzero(table.squarefree[d]):
        index = int(index)
        primes = frozenset((e, i) for e, i, _ in table.factor_index(d, index))
        out.append((index, primes))
    return out


def kummer_pairs(field, d1, d2):
    """Monic index pairs of coprime squarefree (F1, F2) of degrees (d1, d2)."""
    left = squarefree_with_primes(field, d1)
    right = squarefree_with_primes(field, d2)
    return [(i1, i2) for i1, p1 in left for i2, p2 in right if not p1 & p2]


def nonkummer_indices(field, d):
    """Monic indices of F over F_{q^2} of degree d with F * conj(F) squarefree."""
    ext = quadratic_extension(field)
    big = ext.big
    table = factor_table(big, d)
    out = []
    for index in np.flatnonzero(table.squarefree[d]):
        index = int(index)
        primes = {
            Poly.from_monic_index(big, e, i) for e, i, _ in table.factor_index(d, index)
        }
        if all(ext.conjugate(prime) not in primes for prime in primes):
            out.append(index)
    return out


def enumerate_characters(field, g, setting, conjugate=False):
    if setting not in SETTINGS:
        raise ValueError(f"Unknown setting {setting!r}.")
    if g < 0:
        raise ValueError(f"Genus must be nonnegative, got {g}.")
    if setting == KUMMER:
        if field.q % 3 != 1:
            raise ValueError(f"Kummer characters need q = 1 mod 3, got q = {field.q}.")
        for d1, d2 in kummer_blocks(g):
            for i1, i2 in kummer_pairs(field, d1, d2):
                yield CubicCharacter(
                    KUMMER,
                    field,
                    F1=Poly.from_monic_index(field, d1, i1),
                    F2=Poly.from_monic_index(field, d2, i2),
                    conjugate=conjugate,
                )
        return
    if field.q % 3 != 2:
        raise ValueError(f"Non-Kummer characters need q = 2 mod 3, got q = {field.q}.")
    if g % 2:
        return
    big = quadratic_extension(field).big
    d = g // 2 + 1
    for index in nonkummer_indices(field, d):
        yield CubicCharacter(
            NONKUMMER, field, F=Poly.from_monic_index(big, d, index), conjugate=conjugate
        )


def monic_classes(character, n):
    """Classes of chi on every monic polynomial of degree n, in index order (-1 for zero)."""
    rows = monic_matrix(character.field, n)
    if character.setting == KUMMER:
        iso = character.iso
        table = factor_table(character.field, max(character.F1.degree, character.F2.degree, 1))
        c1 = classes_mod(iso, _table_factors(table, character.F1), rows)
        c2 = classes_mod(iso, _table_factors(table, character.F2), rows)
        dead = (c1 < 0) | (c2 < 0)
        return np.where(dead, -1, (c1.astype(np.int64) - c2) % 3).astype(np.int8)
    ext = character.extension
    big_rows = ext.embed_table[rows]
    table = factor_table(ext.big, character.F.degree)
    return classes_mod(character.iso, _table_factors(table, character.F), big_rows)


def _table_factors(table, F):
    if F.degree == 0:
        return []
    return [
        (Poly.from_monic_index(table.field, e, i), k)
        for e, i, k in table.factor_index(F.degree, F.monic_index)
    ]
