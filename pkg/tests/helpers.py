"""Shared golden values and independent oracles.

The golden numbers pin the bundled period model: concentration numerators
(over 7), the reconstructed per-period counts, and the published
4-decimal posterior-mean table.  Oracles here are deliberately dumb -
enumeration and exact rational arithmetic - so they share no code path
with the implementation they check.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator

# Per-period Dirichlet posterior numerators over denominator 7, types 1..7.
POSTERIOR_SEVENTHS = {
    "P1": (15, 22, 8, 1, 1, 1, 1),
    "P2": (29, 36, 15, 8, 1, 1, 1),
    "P3": (43, 1, 43, 64, 29, 1, 71),
    "P4": (15, 1, 15, 8, 15, 1, 43),
    "P5": (1, 1, 1, 15, 1, 8, 36),
}

# Counts reconstructed as (numerator - 1) / 7; verified integral in tests.
PERIOD_COUNTS = {
    "P1": (2, 3, 1, 0, 0, 0, 0),
    "P2": (4, 5, 2, 1, 0, 0, 0),
    "P3": (6, 0, 6, 9, 4, 0, 10),
    "P4": (2, 0, 2, 1, 2, 0, 6),
    "P5": (0, 0, 0, 2, 0, 1, 5),
}

# Published posterior means, 4 printed decimals, types 1..7 per period.
PUBLISHED_MEANS = {
    "P1": (0.3061, 0.4490, 0.1633, 0.0204, 0.0204, 0.0204, 0.0204),
    "P2": (0.3187, 0.3956, 0.1648, 0.0879, 0.0110, 0.0110, 0.0110),
    "P3": (0.1706, 0.0040, 0.1706, 0.2540, 0.1151, 0.0040, 0.2817),
    "P4": (0.1531, 0.0102, 0.1531, 0.0816, 0.1531, 0.0102, 0.4387),
    "P5": (0.0159, 0.0159, 0.0159, 0.2380, 0.0159, 0.1270, 0.5714),
}

# Cells whose printed last digit is inconsistent with the exact value
# derived from the published concentrations (print truncation): the exact
# means are 43/98 = 0.43878 and 15/63 = 0.23810.
PUBLISHED_MEAN_TRUNCATIONS = {("P4", 6), ("P5", 3)}

PERIODS = ("P1", "P2", "P3", "P4", "P5")

EXPLICIT_CLASS_PRIOR = (0.15, 0.20, 0.35, 0.15, 0.15)


def exact_mean(period: str, type_index: int) -> Fraction:
    """Posterior mean of one cell as an exact rational."""
    nums = POSTERIOR_SEVENTHS[period]
    return Fraction(nums[type_index], sum(nums))


def exact_classify_single_arrow(type_index: int) -> list[Fraction]:
    """Exact class posterior for a single arrowhead of one type under the
    explicit class prior: prior times the posterior mean, normalized."""
    prior = [Fraction(15, 100), Fraction(20, 100), Fraction(35, 100),
             Fraction(15, 100), Fraction(15, 100)]
    unnorm = [exact_mean(p, type_index) * w for p, w in zip(PERIODS, prior)]
    total = sum(unnorm)
    return [u / total for u in unnorm]


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ordered tuples of ``parts`` non-negative integers summing to
    ``total``."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in compositions(total - head, parts - 1):
            yield (head,) + rest


def exact_predictive(alpha_num: tuple[int, ...], denom: int,
                     counts: tuple[int, ...]) -> Fraction:
    """Dirichlet-multinomial pmf as an exact rational for rational
    concentrations ``alpha_num[j]/denom``.

    Uses only the rising-factorial form: coefficient * prod_j rising
    (a_j, y_j) / rising(a_plus, n) with rising(a, k) = a (a+1) ... (a+k-1).
    """
    n = sum(counts)
    # multinomial coefficient n! / prod y_j!
    coef = Fraction(math.factorial(n))
    for y in counts:
        coef /= math.factorial(y)

    def rising(a: Fraction, k: int) -> Fraction:
        out = Fraction(1)
        for i in range(k):
            out *= a + i
        return out

    a_plus = Fraction(sum(alpha_num), denom)
    value = coef / rising(a_plus, n)
    for numerator, y in zip(alpha_num, counts):
        value *= rising(Fraction(numerator, denom), y)
    return value
