"""Dirichlet-multinomial conjugate machinery.

Counts over a fixed set of J categorical types are modeled as multinomial
draws; the type-probability vector carries a Dirichlet prior, so the
posterior after observing a count vector is again Dirichlet with each
concentration shifted by the corresponding count.  The default
non-informative prior is the Perks prior, the symmetric Dirichlet with
every concentration equal to 1/J; it never lets a posterior type
probability collapse to exactly 0 or 1.

All types here are immutable and all operations are pure functions, so the
module is safe for concurrent read access.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from dirimult.errors import ValidationError

__all__ = [
    "SIMPLEX_ATOL",
    "Typology",
    "CountVector",
    "DirichletParams",
    "BetaMarginal",
    "PriorFamily",
    "perks_prior",
    "prior_params",
    "posterior_update",
    "log_multinomial_pmf",
    "log_dirichlet_pdf",
    "marginal_beta",
    "posterior_mean_table",
]

# Absolute tolerance on |sum(theta) - 1| for simplex membership: wide enough
# to admit round-tripped normalized vectors, tight enough to reject errors.
SIMPLEX_ATOL = 1e-12

# Relative slack for the maintained alpha_plus field against a fresh fsum.
_ALPHA_PLUS_RTOL = 1e-12


@dataclass(frozen=True)
class Typology:
    """Ordered category labels, fixed for the lifetime of a model."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise ValidationError(
                f"a typology needs at least 2 categories, got {len(labels)}"
            )
        if len(set(labels)) != len(labels):
            raise ValidationError("typology labels must be distinct")
        for lab in labels:
            if not isinstance(lab, str) or not lab.strip():
                raise ValidationError(f"invalid typology label {lab!r}")
            if "," in lab or "\n" in lab:
                raise ValidationError(
                    f"typology label {lab!r} may not contain commas or newlines"
                )

    @property
    def n_types(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown type label {label!r}") from None


@dataclass(frozen=True)
class CountVector:
    """Non-negative integer counts over the J types of one context."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(self.counts)
        object.__setattr__(self, "counts", counts)
        if not counts:
            raise ValidationError("empty count vector")
        for j, c in enumerate(counts):
            if isinstance(c, bool) or not isinstance(c, int):
                raise ValidationError(f"count at position {j} is not an integer: {c!r}")
            if c < 0:
                raise ValidationError(f"negative count at position {j}: {c}")

    @property
    def n(self) -> int:
        """Total count."""
        return sum(self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def __add__(self, other: "CountVector"):
        if not isinstance(other, CountVector):
            return NotImplemented
        if len(other) != len(self):
            raise ValidationError(
                f"cannot add count vectors of length {len(self)} and {len(other)}"
            )
        return CountVector(tuple(a + b for a, b in zip(self.counts, other.counts)))


@dataclass(frozen=True)
class DirichletParams:
    """Strictly positive Dirichlet concentrations and their maintained sum.

    ``alpha_plus`` is carried along rather than recomputed ad hoc; updates
    maintain it incrementally and construction checks it against a fresh
    compensated sum.
    """

    alpha: tuple[float, ...]
    alpha_plus: float | None = None  # derived from alpha when omitted

    def __post_init__(self) -> None:
        alpha = tuple(float(a) for a in self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if len(alpha) < 2:
            raise ValidationError("need at least 2 concentration parameters")
        for j, a in enumerate(alpha):
            if not math.isfinite(a) or a <= 0.0:
                raise ValidationError(
                    f"concentration parameters must be positive and finite, "
                    f"got alpha[{j}] = {a!r}"
                )
        total = math.fsum(alpha)
        if self.alpha_plus is None:
            object.__setattr__(self, "alpha_plus", total)
        else:
            object.__setattr__(self, "alpha_plus", float(self.alpha_plus))
            if abs(self.alpha_plus - total) > _ALPHA_PLUS_RTOL * max(1.0, abs(total)):
                raise ValidationError(
                    f"alpha_plus={self.alpha_plus!r} inconsistent with "
                    f"sum(alpha)={total!r}"
                )

    def __len__(self) -> int:
        return len(self.alpha)


@dataclass(frozen=True)
class BetaMarginal:
    """One component's marginal Beta(a, b) with its mean and variance."""

    a: float
    b: float
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValidationError("Beta parameters must be positive")
        if not (0.0 < self.mean < 1.0):
            raise ValidationError(f"Beta mean {self.mean!r} outside (0, 1)")


class PriorFamily(Enum):
    """Symmetric non-informative prior families.

    Perks (1/J) is the default throughout.  Haldane is the improper
    all-zero limit: it is listed for completeness but cannot be
    materialized as a prior, and a posterior under it is proper only when
    every type has been observed.
    """

    PERKS = "perks"
    JEFFREYS = "jeffreys"
    LAPLACE = "laplace"
    HALDANE = "haldane"

    def concentration(self, n_types: int) -> float:
        """Per-component concentration for a typology of ``n_types``."""
        if self is PriorFamily.PERKS:
            return 1.0 / n_types
        if self is PriorFamily.JEFFREYS:
            return 0.5
        if self is PriorFamily.LAPLACE:
            return 1.0
        return 0.0


def perks_prior(typology: Typology) -> DirichletParams:
    """The symmetric Dirichlet with all concentrations exactly 1/J."""
    j = typology.n_types
    return DirichletParams((1.0 / j,) * j, alpha_plus=1.0)


def prior_params(typology: Typology, family: PriorFamily = PriorFamily.PERKS) -> DirichletParams:
    """Concentration parameters of ``family`` for ``typology``.

    Raises for Haldane: the all-zero Dirichlet is improper and has no
    usable density; see :func:`dirimult.classifier.fit_model` for the one
    place a Haldane *posterior* can exist.
    """
    if family is PriorFamily.HALDANE:
        raise ValidationError(
            "the Haldane prior (all concentrations 0) is improper and cannot "
            "be materialized; a posterior under it exists only when every "
            "type has a positive count"
        )
    if family is PriorFamily.PERKS:
        return perks_prior(typology)
    j = typology.n_types
    c = family.concentration(j)
    return DirichletParams((c,) * j, alpha_plus=c * j)


def _check_dims(expected: int, got: int, what: str) -> None:
    if expected != got:
        raise ValidationError(f"{what}: expected length {expected}, got {got}")


def posterior_update(prior: DirichletParams, data: CountVector) -> DirichletParams:
    """Conjugate update: add the observed counts to the concentrations.

    Commutative and associative over a sequence of count vectors (exactly
    so while the magnitudes keep float addition of integers exact); a
    zero-total count vector is a no-op.
    """
    _check_dims(len(prior), len(data), "posterior_update counts")
    alpha = tuple(a + c for a, c in zip(prior.alpha, data.counts))
    return DirichletParams(alpha, alpha_plus=prior.alpha_plus + data.n)


def _check_simplex(theta: Sequence[float], *, open_interior: bool) -> tuple[float, ...]:
    theta = tuple(float(t) for t in theta)
    for j, t in enumerate(theta):
        if not math.isfinite(t):
            raise ValidationError(f"theta[{j}] = {t!r} is not finite")
        if t < 0.0:
            raise ValidationError(f"theta[{j}] = {t!r} is negative")
        if open_interior and t == 0.0:
            raise ValidationError(
                f"theta[{j}] = 0 lies on the simplex boundary; the density "
                "is not finite there when the matching concentration is < 1"
            )
    total = math.fsum(theta)
    if abs(total - 1.0) > SIMPLEX_ATOL:
        raise ValidationError(
            f"theta does not lie on the simplex: sum = {total!r} "
            f"(|sum - 1| > {SIMPLEX_ATOL})"
        )
    return theta


def log_multinomial_pmf(theta: Sequence[float], data: CountVector) -> float:
    """log of the multinomial pmf at ``data`` for cell probabilities ``theta``.

    Zero cells contribute nothing when their count is zero (0*log 0 := 0);
    a positive count on a zero cell gives -inf.
    """
    theta = _check_simplex(theta, open_interior=False)
    _check_dims(len(theta), len(data), "log_multinomial_pmf counts")
    n = data.n
    out = math.lgamma(n + 1)
    for t, y in zip(theta, data.counts):
        if y == 0:
            continue
        if t == 0.0:
            return float("-inf")
        out += y * math.log(t) - math.lgamma(y + 1)
    return out


def log_dirichlet_pdf(params: DirichletParams, theta: Sequence[float]) -> float:
    """log density of Dirichlet(``params``) at an interior simplex point."""
    theta = _check_simplex(theta, open_interior=True)
    _check_dims(len(theta), len(params), "log_dirichlet_pdf theta")
    out = math.lgamma(params.alpha_plus)
    for a, t in zip(params.alpha, theta):
        out += (a - 1.0) * math.log(t) - math.lgamma(a)
    return out


def marginal_beta(params: DirichletParams, j: int) -> BetaMarginal:
    """Marginal Beta(alpha_j, alpha_plus - alpha_j) of type ``j`` (0-based)."""
    if not 0 <= j < len(params):
        raise ValidationError(
            f"type index {j} out of range [0, {len(params) - 1}]"
        )
    a = params.alpha[j]
    b = params.alpha_plus - a
    s = a + b
    mean = a / s
    variance = a * b / (s * s * (s + 1.0))
    return BetaMarginal(a=a, b=b, mean=mean, variance=variance)


def posterior_mean_table(models: Sequence[DirichletParams]) -> list[list[float]]:
    """Posterior mean of each type probability under each parameter set.

    Entry ``[j][i]`` is type j's mean under model i, so each column is a
    probability vector.
    """
    models = list(models)
    if not models:
        raise ValidationError("posterior_mean_table needs at least one model")
    width = len(models[0])
    for m in models[1:]:
        _check_dims(width, len(m), "posterior_mean_table models")
    return [[m.alpha[j] / m.alpha_plus for m in models] for j in range(width)]
