"""End-to-end validation: Monte-Carlo oracle and leave-one-out.

The closed-form predictive is checked against a plain Monte-Carlo
estimate of the defining integral (draw Dirichlet points by normalizing
gamma variates, average the multinomial pmf).  Leave-one-out
cross-validation refits by *downdating*: a record's counts are subtracted
from its class posterior, which is exact for integer counts, so a fold
never retrains from scratch.

Seeding is hierarchical: every oracle pair gets its own stream derived
from the master seed by index, so parallel and sequential evaluation
would agree bit-for-bit (this implementation is sequential).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from dirimult import backend
from dirimult.classifier import (
    ClassPrior,
    FittedModel,
    classify_batch,
    empirical_class_prior,
    fit_model,
    log_predictive_likelihood,
)
from dirimult.conjugate import CountVector, DirichletParams, PriorFamily, Typology
from dirimult.dataio import Corpus
from dirimult.errors import ValidationError
from dirimult.rng import Xoshiro256StarStar, derive_seed

__all__ = [
    "OracleComparison",
    "OracleRow",
    "mc_predictive_oracle",
    "random_queries",
    "oracle_report",
    "LooRecord",
    "LooReport",
    "leave_one_out",
    "downdate",
    "loo_report_csv",
    "loo_report_text",
    "oracle_report_csv",
    "oracle_report_text",
]

MIN_ORACLE_SAMPLES = 10_000

# |closed-form - MC| must stay within max(floor, 3 * stderr)
ORACLE_LOG_TOL_FLOOR = 1e-2


@dataclass(frozen=True)
class OracleComparison:
    """Closed-form vs Monte-Carlo log predictive for one (class, query)."""

    closed_form_log: float
    mc_log: float
    mc_stderr: float  # log-space, delta method: linear stderr / mean
    n_samples: int
    seed: int

    @property
    def abs_error(self) -> float:
        return abs(self.closed_form_log - self.mc_log)

    def passed(self, floor: float = ORACLE_LOG_TOL_FLOOR) -> bool:
        return self.abs_error <= max(floor, 3.0 * self.mc_stderr)


@dataclass(frozen=True)
class OracleRow:
    class_label: str
    counts: tuple[int, ...]
    comparison: OracleComparison


def mc_predictive_oracle(
    posterior: DirichletParams,
    query: CountVector,
    n_samples: int = 1_000_000,
    seed: int = 0,
) -> OracleComparison:
    """Monte-Carlo check of the closed-form predictive at ``query``."""
    if n_samples < MIN_ORACLE_SAMPLES:
        raise ValidationError(
            f"oracle needs at least {MIN_ORACLE_SAMPLES} samples, got {n_samples}"
        )
    closed = log_predictive_likelihood(posterior, query)
    log_coef = math.lgamma(query.n + 1) - math.fsum(
        math.lgamma(y + 1) for y in query.counts
    )
    mean, stderr = backend.predictive_mc_moments(
        posterior.alpha, query.counts, log_coef, n_samples, seed
    )
    if mean <= 0.0:
        return OracleComparison(
            closed_form_log=closed,
            mc_log=float("-inf"),
            mc_stderr=float("inf"),
            n_samples=n_samples,
            seed=seed,
        )
    return OracleComparison(
        closed_form_log=closed,
        mc_log=math.log(mean),
        mc_stderr=stderr / mean,
        n_samples=n_samples,
        seed=seed,
    )


def random_queries(
    typology: Typology,
    n_queries: int = 10,
    max_total: int = 6,
    seed: int = 0,
) -> list[CountVector]:
    """Deterministic random queries: total uniform on 1..max_total, types
    uniform."""
    if n_queries < 1 or max_total < 1:
        raise ValidationError("need n_queries >= 1 and max_total >= 1")
    rng = Xoshiro256StarStar(seed)
    j = typology.n_types
    out = []
    for _ in range(n_queries):
        total = 1 + min(int(rng.uniform() * max_total), max_total - 1)
        counts = [0] * j
        for _ in range(total):
            counts[min(int(rng.uniform() * j), j - 1)] += 1
        out.append(CountVector(tuple(counts)))
    return out


def oracle_report(
    model: FittedModel,
    n_samples: int = 1_000_000,
    seed: int = 0,
    n_queries: int = 10,
    max_total: int = 6,
) -> list[OracleRow]:
    """Oracle comparisons for every (class, random query) pair.

    Stream layout: queries use child seed 0 of ``seed``; pair (class i,
    query q) uses child seed ``1 + i * n_queries + q``.
    """
    queries = random_queries(
        model.typology, n_queries=n_queries, max_total=max_total,
        seed=derive_seed(seed, 0),
    )
    rows = []
    for i, (label, post) in enumerate(zip(model.class_labels, model.posteriors)):
        for q, query in enumerate(queries):
            pair_seed = derive_seed(seed, 1 + i * len(queries) + q)
            comp = mc_predictive_oracle(post, query, n_samples, pair_seed)
            rows.append(OracleRow(label, query.counts, comp))
    return rows


def downdate(posterior: DirichletParams, data: CountVector) -> DirichletParams:
    """Remove previously added counts: exact inverse of posterior_update
    for integer counts at representable magnitudes."""
    if len(posterior) != len(data):
        raise ValidationError(
            f"counts have {len(data)} components, posterior has {len(posterior)}"
        )
    alpha = tuple(a - y for a, y in zip(posterior.alpha, data.counts))
    return DirichletParams(alpha, alpha_plus=posterior.alpha_plus - data.n)


@dataclass(frozen=True)
class LooRecord:
    site_id: str
    true_class: str
    predicted_class: str
    probs: tuple[float, ...]


@dataclass(frozen=True)
class LooReport:
    class_labels: tuple[str, ...]
    records: tuple[LooRecord, ...]
    confusion: tuple[tuple[int, ...], ...]  # [true][predicted]
    accuracy: float
    mean_log_score: float


def leave_one_out(
    corpus: Corpus,
    prior_family: PriorFamily = PriorFamily.PERKS,
    class_prior: ClassPrior | str = "empirical",
) -> LooReport:
    """Classify every record against a model refit without it.

    Refitting means subtracting the record's counts from its class
    posterior (a class losing all its data falls back to the bare prior)
    and, when the prior source is empirical, recomputing the class prior
    over the remaining records.  Deterministic: no randomness anywhere.
    """
    if len(corpus.records) < 2:
        raise ValidationError("leave-one-out needs at least 2 records")
    if len(set(r.class_label for r in corpus.records)) < 2:
        raise ValidationError("leave-one-out needs records from at least 2 classes")
    full = fit_model(corpus, prior_family=prior_family, class_prior=class_prior)
    labels = full.class_labels
    index = {c: i for i, c in enumerate(labels)}
    records = []
    confusion = [[0] * len(labels) for _ in labels]
    log_scores = []
    all_labels = [r.class_label for r in corpus.records]
    for k, rec in enumerate(corpus.records):
        i = index[rec.class_label]
        posteriors = list(full.posteriors)
        posteriors[i] = downdate(posteriors[i], rec.counts)
        if isinstance(class_prior, ClassPrior):
            prior = class_prior
        elif class_prior == "empirical":
            prior = empirical_class_prior(
                labels, all_labels[:k] + all_labels[k + 1:]
            )
        else:
            prior = ClassPrior.uniform(len(labels))
        fold_model = FittedModel(
            typology=full.typology,
            class_labels=labels,
            posteriors=tuple(posteriors),
            prior=prior,
        )
        result = classify_batch(fold_model, [rec.counts])[0]
        records.append(
            LooRecord(
                site_id=rec.site_id,
                true_class=rec.class_label,
                predicted_class=result.argmax,
                probs=result.probs,
            )
        )
        confusion[i][index[result.argmax]] += 1
        p_true = result.probs[i]
        log_scores.append(math.log(p_true) if p_true > 0.0 else float("-inf"))
    total = len(records)
    correct = sum(confusion[i][i] for i in range(len(labels)))
    return LooReport(
        class_labels=labels,
        records=tuple(records),
        confusion=tuple(tuple(row) for row in confusion),
        accuracy=correct / total,
        mean_log_score=math.fsum(log_scores) / total,
    )


def loo_report_csv(report: LooReport) -> str:
    header = ["site_id", "true_class", "predicted_class"] + [
        f"P({c})" for c in report.class_labels
    ]
    lines = [",".join(header)]
    for r in report.records:
        lines.append(
            ",".join(
                [r.site_id, r.true_class, r.predicted_class]
                + [repr(p) for p in r.probs]
            )
        )
    return "\n".join(lines) + "\n"


def loo_report_text(report: LooReport) -> str:
    width = max(len(c) for c in report.class_labels)
    lines = [
        "leave-one-out cross-validation",
        f"records:        {len(report.records)}",
        f"accuracy:       {report.accuracy:.4f}",
        f"mean log score: {report.mean_log_score:.4f}",
        "",
        "confusion (rows = true, columns = predicted):",
        " " * (width + 2) + "  ".join(f"{c:>{width}}" for c in report.class_labels),
    ]
    for c, row in zip(report.class_labels, report.confusion):
        lines.append(
            f"{c:>{width}}  " + "  ".join(f"{v:>{width}d}" for v in row)
        )
    return "\n".join(lines) + "\n"


def oracle_report_csv(rows: Sequence[OracleRow]) -> str:
    header = [
        "class", "query_counts", "closed_form_log", "mc_log",
        "mc_stderr", "abs_error", "n_samples", "seed", "passed",
    ]
    lines = [",".join(header)]
    for row in rows:
        c = row.comparison
        lines.append(
            ",".join(
                [
                    row.class_label,
                    "|".join(str(v) for v in row.counts),
                    repr(c.closed_form_log),
                    repr(c.mc_log),
                    repr(c.mc_stderr),
                    repr(c.abs_error),
                    str(c.n_samples),
                    str(c.seed),
                    "yes" if c.passed() else "no",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def oracle_report_text(rows: Sequence[OracleRow]) -> str:
    n_pass = sum(1 for r in rows if r.comparison.passed())
    lines = [
        "Monte-Carlo oracle vs closed-form predictive",
        f"pairs: {len(rows)}   passed: {n_pass}   failed: {len(rows) - n_pass}",
        "",
        f"{'class':<10} {'query':<18} {'closed':>12} {'mc':>12} "
        f"{'3*stderr':>10} {'ok':>3}",
    ]
    for row in rows:
        c = row.comparison
        q = "(" + ",".join(str(v) for v in row.counts) + ")"
        lines.append(
            f"{row.class_label:<10} {q:<18} {c.closed_form_log:>12.6f} "
            f"{c.mc_log:>12.6f} {3 * c.mc_stderr:>10.6f} "
            f"{'y' if c.passed() else 'N':>3}"
        )
    return "\n".join(lines) + "\n"
