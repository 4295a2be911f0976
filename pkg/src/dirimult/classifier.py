"""Posterior predictive classification over per-class Dirichlet posteriors.

Given one fitted Dirichlet posterior per class and a prior over classes,
an unlabeled count vector is scored with the closed-form posterior
predictive (the Dirichlet-multinomial pmf, a product of gamma-function
ratios) and the class posterior follows from Bayes' theorem.  Everything
is computed in natural-log space; probabilities only materialize after a
max-shifted log-sum-exp, so totals in the thousands cannot underflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from dirimult.conjugate import (
    CountVector,
    DirichletParams,
    PriorFamily,
    Typology,
    posterior_update,
    prior_params,
)
from dirimult.errors import ValidationError

if TYPE_CHECKING:
    from dirimult.dataio import Corpus

__all__ = [
    "ClassPrior",
    "FittedModel",
    "Classification",
    "log_predictive_likelihood",
    "log_normalize",
    "empirical_class_prior",
    "classify",
    "classify_batch",
    "fit_model",
]

_PRIOR_ATOL = 1e-12


@dataclass(frozen=True)
class ClassPrior:
    """Probability of each class before seeing any counts."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise ValidationError("empty class prior")
        for i, p in enumerate(probs):
            if not (0.0 <= p <= 1.0):
                raise ValidationError(f"prior[{i}] = {p!r} outside [0, 1]")
        total = math.fsum(probs)
        if abs(total - 1.0) > _PRIOR_ATOL:
            raise ValidationError(
                f"class prior sums to {total!r}, not 1 (tolerance {_PRIOR_ATOL})"
            )

    @classmethod
    def uniform(cls, n_classes: int) -> "ClassPrior":
        return cls((1.0 / n_classes,) * n_classes)

    def __len__(self) -> int:
        return len(self.probs)


def empirical_class_prior(
    class_labels: Sequence[str], site_labels: Iterable[str]
) -> ClassPrior:
    """Class prior from the proportion of training sites in each class."""
    sites = list(site_labels)
    if not sites:
        raise ValidationError("cannot estimate a class prior from zero sites")
    index = {c: i for i, c in enumerate(class_labels)}
    tallies = [0] * len(class_labels)
    for s in sites:
        if s not in index:
            raise ValidationError(f"site label {s!r} is not a declared class")
        tallies[index[s]] += 1
    total = len(sites)
    return ClassPrior(tuple(t / total for t in tallies))


@dataclass(frozen=True)
class FittedModel:
    """One Dirichlet posterior per class plus the class prior."""

    typology: Typology
    class_labels: tuple[str, ...]
    posteriors: tuple[DirichletParams, ...]
    prior: ClassPrior

    def __post_init__(self) -> None:
        labels = tuple(self.class_labels)
        object.__setattr__(self, "class_labels", labels)
        object.__setattr__(self, "posteriors", tuple(self.posteriors))
        if len(labels) < 2:
            raise ValidationError("a model needs at least 2 classes")
        if len(set(labels)) != len(labels):
            raise ValidationError("class labels must be distinct")
        for lab in labels:
            if not lab or "," in lab or "\n" in lab:
                raise ValidationError(f"invalid class label {lab!r}")
        if len(self.posteriors) != len(labels):
            raise ValidationError(
                f"{len(labels)} classes but {len(self.posteriors)} posteriors"
            )
        j = self.typology.n_types
        for lab, post in zip(labels, self.posteriors):
            if len(post) != j:
                raise ValidationError(
                    f"posterior for class {lab!r} has {len(post)} components, "
                    f"typology has {j}"
                )
        if len(self.prior) != len(labels):
            raise ValidationError(
                f"class prior has {len(self.prior)} entries for "
                f"{len(labels)} classes"
            )

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def class_index(self, label: str) -> int:
        try:
            return self.class_labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown class label {label!r}") from None


@dataclass(frozen=True)
class Classification:
    """Per-class result for one query.

    ``no_evidence`` marks a zero-total query scored inside a batch: the
    predictive of an empty count vector is exactly 1 for every class, so
    the class posterior degenerates to the prior.
    """

    log_likelihoods: tuple[float, ...]
    log_unnormalized: tuple[float, ...]
    probs: tuple[float, ...]
    argmax: str
    no_evidence: bool = False


def log_predictive_likelihood(posterior: DirichletParams, query: CountVector) -> float:
    """log pmf of ``query`` under the posterior predictive of ``posterior``.

    The multinomial coefficient is included, so summing ``exp`` of this
    over all count vectors with the same total gives 1.  Everything is a
    sum of lgamma differences: finite for totals up to at least 1e6.
    """
    if len(posterior) != len(query):
        raise ValidationError(
            f"query has {len(query)} components, posterior has {len(posterior)}"
        )
    n = query.n
    if n < 1:
        raise ValidationError(
            "query has zero total count: no evidence to score "
            "(classify_batch flags such records instead)"
        )
    ap = posterior.alpha_plus
    out = math.lgamma(n + 1) + math.lgamma(ap) - math.lgamma(ap + n)
    for a, y in zip(posterior.alpha, query.counts):
        if y != 0:
            out += math.lgamma(a + y) - math.lgamma(a) - math.lgamma(y + 1)
    return out


def log_normalize(log_weights: Sequence[float]) -> tuple[float, ...]:
    """Probabilities from unnormalized log weights via max-shifted sum-exp."""
    if not log_weights:
        raise ValidationError("nothing to normalize")
    m = max(log_weights)
    if m == float("-inf"):
        raise ValidationError("all log weights are -inf; nothing has support")
    shifted = [math.exp(w - m) for w in log_weights]
    total = math.fsum(shifted)
    return tuple(s / total for s in shifted)


def _argmax_label(labels: Sequence[str], values: Sequence[float]) -> str:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:  # ties keep the earlier class
            best = i
    return labels[best]


def classify(model: FittedModel, query: CountVector) -> Classification:
    """Class posterior for one non-empty query under ``model``."""
    if len(query) != model.typology.n_types:
        raise ValidationError(
            f"query has {len(query)} components, model typology has "
            f"{model.typology.n_types}"
        )
    if any(p == 0.0 for p in model.prior.probs):
        warnings.warn(
            "some classes have zero prior probability and can never be "
            "predicted",
            RuntimeWarning,
            stacklevel=2,
        )
    log_liks = tuple(
        log_predictive_likelihood(post, query) for post in model.posteriors
    )
    log_unnorm = tuple(
        ll + (math.log(p) if p > 0.0 else float("-inf"))
        for ll, p in zip(log_liks, model.prior.probs)
    )
    probs = log_normalize(log_unnorm)
    return Classification(
        log_likelihoods=log_liks,
        log_unnormalized=log_unnorm,
        probs=probs,
        argmax=_argmax_label(model.class_labels, log_unnorm),
    )


def _no_evidence_record(model: FittedModel) -> Classification:
    i = model.n_classes
    log_prior = tuple(
        math.log(p) if p > 0.0 else float("-inf") for p in model.prior.probs
    )
    return Classification(
        log_likelihoods=(0.0,) * i,
        log_unnormalized=log_prior,
        probs=model.prior.probs,
        argmax=_argmax_label(model.class_labels, model.prior.probs),
        no_evidence=True,
    )


def classify_batch(
    model: FittedModel, queries: Sequence[CountVector]
) -> list[Classification]:
    """Elementwise :func:`classify`; zero-total queries are flagged, not fatal.

    Sequential and order-preserving, so results are reproducible
    byte-for-byte.
    """
    out = []
    for q in queries:
        if q.n == 0:
            out.append(_no_evidence_record(model))
        else:
            out.append(classify(model, q))
    return out


def fit_model(
    corpus: "Corpus",
    prior_family: PriorFamily = PriorFamily.PERKS,
    class_prior: ClassPrior | str = "empirical",
    prior_sites: Iterable[str] | None = None,
) -> FittedModel:
    """Fit per-class posteriors on a training corpus.

    ``class_prior`` is either an explicit :class:`ClassPrior`, or one of
    ``"empirical"`` (proportion of training records per class, or of
    ``prior_sites`` when given) and ``"uniform"``.

    The Haldane family has no proper prior; its posterior is the raw
    counts, which is valid only when every class observed every type.
    """
    classes = corpus.classes
    totals = corpus.class_totals()
    if prior_family is PriorFamily.HALDANE:
        posteriors = []
        for c in classes:
            counts = totals[c].counts
            for lab, y in zip(corpus.typology.labels, counts):
                if y == 0:
                    raise ValidationError(
                        f"Haldane posterior for class {c!r} is improper: "
                        f"type {lab!r} was never observed"
                    )
            posteriors.append(
                DirichletParams(tuple(float(y) for y in counts))
            )
        posteriors = tuple(posteriors)
    else:
        base = prior_params(corpus.typology, prior_family)
        posteriors = tuple(posterior_update(base, totals[c]) for c in classes)

    if isinstance(class_prior, ClassPrior):
        if len(class_prior) != len(classes):
            raise ValidationError(
                f"explicit class prior has {len(class_prior)} entries for "
                f"{len(classes)} classes"
            )
        prior = class_prior
    elif class_prior == "empirical":
        labels = (
            list(prior_sites)
            if prior_sites is not None
            else [r.class_label for r in corpus.records]
        )
        prior = empirical_class_prior(classes, labels)
    elif class_prior == "uniform":
        prior = ClassPrior.uniform(len(classes))
    else:
        raise ValidationError(
            f"class_prior must be a ClassPrior, 'empirical' or 'uniform', "
            f"got {class_prior!r}"
        )

    if any(p == 0.0 for p in prior.probs):
        zero = [c for c, p in zip(classes, prior.probs) if p == 0.0]
        warnings.warn(
            f"classes with zero prior probability will never be predicted: "
            f"{', '.join(zero)}",
            RuntimeWarning,
            stacklevel=2,
        )
    return FittedModel(
        typology=corpus.typology,
        class_labels=classes,
        posteriors=posteriors,
        prior=prior,
    )
