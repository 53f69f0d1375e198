import logging
from dataclasses import dataclass

import numpy as np

from ffcubic.lib.characters import KUMMER, NONKUMMER, SETTINGS
from ffcubic.lib.ffpoly import factor_table
from ffcubic.moments.constants import kummer_count_constants, nonkummer_count_constant

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CountResult:
    setting: str
    q: int
    d: int
    exact: int
    asymptotic: float

    @property
    def ratio(self):
        return self.exact / self.asymptotic if self.asymptotic else float("nan")

    def to_json(self):
        return {
            "setting": self.setting,
            "q": self.q,
            "d": self.d,
            "exact": self.exact,
            "asymptotic": self.asymptotic,
        }


def _check_setting(field, setting):
    if setting not in SETTINGS:
        raise ValueError(f"Unknown setting {setting!r}.")
    if setting == KUMMER and field.q % 3 != 1:
        raise ValueError(f"Kummer counts need q = 1 mod 3, got q = {field.q}.")
    if setting == NONKUMMER and field.q % 3 != 2:
        raise ValueError(f"Non-Kummer counts need q = 2 mod 3, got q = {field.q}.")


def even_support_mask(table, d):
    """Monic polynomials of degree d all of whose prime factors have even degree."""
    masks = [np.ones(1, dtype=bool)]
    for e in range(1, d + 1):
        spf = table.spf_degree[e].astype(np.int64)
        cofactor = table.cofactor[e]
        mask = np.zeros(spf.size, dtype=bool)
        for s in np.unique(spf):
            sel = spf == s
            if s % 2 == 0:
                mask[sel] = masks[e - s][cofactor[sel]]
        masks.append(mask)
    return masks[d]


def exact_count(field, setting, d):
    """Sum of 2^omega(F) over squarefree monic F of degree d, F supported on even-degree primes
    in the non-Kummer setting."""
    if d < 1:
        raise ValueError(f"Conductor degree must be at least 1, got {d}.")
    table = factor_table(field, d)
    live = table.squarefree[d].copy()
    if setting == NONKUMMER:
        if d % 2:
            return 0
        live &= even_support_mask(table, d)
    omega = table.omega[d][live].astype(np.int64)
    return int(np.sum(np.left_shift(1, omega)))


def asymptotic_count(q, setting, d, truncation=None):
    if setting == KUMMER:
        B1, B2 = kummer_count_constants(q, truncation)
        return (B1.re * d + B2.re) * float(q) ** d
    if d % 2:
        return 0.0
    return nonkummer_count_constant(q, truncation).re * float(q) ** d


def count_primitive(field, setting, d, truncation=None):
    """Primitive cubic characters with conductor of degree d, exactly and from the Euler product."""
    _check_setting(field, setting)
    exact = exact_count(field, setting, d)
    asymptotic = asymptotic_count(field.q, setting, d, truncation)
    logger.debug("%s count q = %d d = %d: exact %d, asymptotic %.6g", setting, field.q, d, exact, asymptotic)
    return CountResult(setting, field.q, d, exact, asymptotic)


def count_restriction_class(field, d, r):
    """Kummer characters of conductor degree d with chi(c) = chi_3(c)^r on F_q^*.

    Each squarefree F = F1 F2 contributes the splits with deg F1 + 2 deg F2 = r mod 3.
    """
    _check_setting(field, KUMMER)
    if d < 1:
        raise ValueError(f"Conductor degree must be at least 1, got {d}.")
    table = factor_table(field, d)
    total = 0
    for index in np.flatnonzero(table.squarefree[d]):
        counts = [1, 0, 0]
        for e, _, _ in table.factor_index(d, int(index)):
            counts = [counts[(k - e) % 3] + counts[(k - 2 * e) % 3] for k in range(3)]
        total += counts[r % 3]
    return total
