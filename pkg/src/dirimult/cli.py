"""Command-line frontend: ``train``, ``classify``, ``plot``, ``eval``.

Exit codes: 0 success, 1 invalid input (bad files, bad flags, bad data),
2 internal failure.  The seed comes from ``--seed``, falling back to the
``DIRIMULT_SEED`` environment variable, then 0.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from dirimult import __version__
from dirimult.classifier import ClassPrior, FittedModel, classify_batch, fit_model
from dirimult.conjugate import PriorFamily, posterior_mean_table
from dirimult.dataio import (
    format_concentration,
    parse_model,
    parse_query_csv,
    parse_roster_csv,
    parse_training_csv,
    serialize_model,
)
from dirimult.errors import DirimultError, ValidationError
from dirimult.evaluation import (
    leave_one_out,
    loo_report_csv,
    loo_report_text,
    oracle_report,
    oracle_report_csv,
    oracle_report_text,
)
from dirimult.svgplot import marginals_svg, posterior_means_svg

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INTERNAL = 2

_EXPLICIT_PRIOR_ATOL = 1e-9


def _read(path: str) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"no such file: {path}")
    return p.read_bytes()


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("DIRIMULT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(
                f"DIRIMULT_SEED={env!r} is not an integer"
            ) from None
    return 0


def _class_prior_arg(args, classes: tuple[str, ...], roster_sites):
    """Map (--class-prior, --explicit-prior, --roster) to fit_model inputs."""
    if args.class_prior == "explicit":
        if not args.explicit_prior:
            raise ValidationError(
                "--class-prior explicit requires --explicit-prior v1,..,vI"
            )
        try:
            values = tuple(float(v) for v in args.explicit_prior.split(","))
        except ValueError:
            raise ValidationError(
                f"--explicit-prior is not a comma-separated float list: "
                f"{args.explicit_prior!r}"
            ) from None
        if len(values) != len(classes):
            raise ValidationError(
                f"--explicit-prior has {len(values)} values for "
                f"{len(classes)} classes"
            )
        total = math.fsum(values)
        if abs(total - 1.0) > _EXPLICIT_PRIOR_ATOL:
            raise ValidationError(
                f"--explicit-prior sums to {total!r}, not 1 "
                f"(tolerance {_EXPLICIT_PRIOR_ATOL})"
            )
        if total != 1.0:
            # accepted at the loose flag tolerance; make it exact inside
            values = tuple(v / total for v in values)
        return ClassPrior(values), None
    if args.explicit_prior:
        raise ValidationError(
            "--explicit-prior is only valid with --class-prior explicit"
        )
    return args.class_prior, roster_sites


def _train_model(args) -> FittedModel:
    corpus = parse_training_csv(_read(args.training_csv))
    roster_sites = None
    if getattr(args, "roster", None):
        roster_sites = [c for _, c in parse_roster_csv(_read(args.roster))]
    prior, sites = _class_prior_arg(args, corpus.classes, roster_sites)
    return fit_model(
        corpus,
        prior_family=PriorFamily(args.prior),
        class_prior=prior,
        prior_sites=sites,
    )


def _print_model_summary(model: FittedModel, out) -> None:
    j = model.typology.n_types
    width = max(len(c) for c in model.class_labels)
    print("fitted posteriors:", file=out)
    for label, post in zip(model.class_labels, model.posteriors):
        body = ", ".join(format_concentration(a, j) for a in post.alpha)
        print(f"  {label:<{width}}  Dir({body})", file=out)
    print(
        "class prior: "
        + ", ".join(
            f"{c}={p:g}" for c, p in zip(model.class_labels, model.prior.probs)
        ),
        file=out,
    )
    print("posterior mean of each type probability:", file=out)
    table = posterior_mean_table(model.posteriors)
    head = "  ".join(f"{c:>8}" for c in model.class_labels)
    tw = max(len(t) for t in model.typology.labels)
    print(f"  {'type':<{tw}}  {head}", file=out)
    for t, row in zip(model.typology.labels, table):
        cells = "  ".join(f"{v:>8.4f}" for v in row)
        print(f"  {t:<{tw}}  {cells}", file=out)


def _cmd_train(args) -> int:
    model = _train_model(args)
    Path(args.out).write_bytes(serialize_model(model))
    _print_model_summary(model, sys.stdout)
    print(f"model written to {args.out}")
    return EXIT_OK


def _format_prob(p: float, full_precision: bool) -> str:
    return repr(p) if full_precision else f"{p:.4f}"


def _cmd_classify(args) -> int:
    model = parse_model(_read(args.model))
    queries = parse_query_csv(_read(args.query_csv))
    lines = []
    header = (
        ["site_id"]
        + [f"P({c})" for c in model.class_labels]
        + ["argmax", "note"]
    )
    lines.append(",".join(header))
    results = classify_batch(model, [q.counts for q in queries])
    for q, r in zip(queries, results):
        note = "no_evidence" if r.no_evidence else ""
        lines.append(
            ",".join(
                [q.site_id]
                + [_format_prob(p, args.full_precision) for p in r.probs]
                + [r.argmax, note]
            )
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"classified {len(queries)} queries -> {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_plot(args) -> int:
    model = parse_model(_read(args.model))
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"cannot create output directory: {exc}") from None
    targets = {
        "posterior_means.svg": posterior_means_svg(model),
        "marginals.svg": marginals_svg(model),
    }
    for name, svg in targets.items():
        try:
            (out_dir / name).write_text(svg, encoding="utf-8")
        except OSError as exc:
            raise ValidationError(f"cannot write {name}: {exc}") from None
        print(f"wrote {out_dir / name}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    corpus = parse_training_csv(_read(args.training_csv))
    roster_sites = None
    if args.roster:
        roster_sites = [c for _, c in parse_roster_csv(_read(args.roster))]
    prior, sites = _class_prior_arg(args, corpus.classes, roster_sites)
    seed = _resolve_seed(args.seed)
    loo = leave_one_out(
        corpus, prior_family=PriorFamily(args.prior), class_prior=prior
    )
    model = fit_model(
        corpus,
        prior_family=PriorFamily(args.prior),
        class_prior=prior,
        prior_sites=sites,
    )
    oracle = oracle_report(
        model,
        n_samples=args.oracle_samples,
        seed=seed,
        n_queries=args.oracle_queries,
    )
    loo_text = loo_report_text(loo)
    oracle_text = oracle_report_text(oracle)
    sys.stdout.write(loo_text)
    print()
    sys.stdout.write(oracle_text)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "loo_report.csv").write_text(loo_report_csv(loo), encoding="utf-8")
        (out_dir / "loo_report.txt").write_text(loo_text, encoding="utf-8")
        (out_dir / "oracle_report.csv").write_text(
            oracle_report_csv(oracle), encoding="utf-8"
        )
        (out_dir / "oracle_report.txt").write_text(oracle_text, encoding="utf-8")
        print(f"reports written to {out_dir}")
    n_fail = sum(1 for r in oracle if not r.comparison.passed())
    if n_fail:
        # expected occasionally at small sample counts: the band is 3 sigma
        print(
            f"note: {n_fail} of {len(oracle)} oracle pairs fell outside the "
            "3-sigma band; rerun with a larger --oracle-samples to tighten it"
        )
    return EXIT_OK


def _add_prior_flags(sub, include_roster: bool) -> None:
    sub.add_argument(
        "--prior",
        choices=[f.value for f in PriorFamily],
        default=PriorFamily.PERKS.value,
        help="prior family for the type proportions (default: perks)",
    )
    sub.add_argument(
        "--class-prior",
        choices=["empirical", "uniform", "explicit"],
        default="empirical",
        help="source of the class prior (default: empirical)",
    )
    sub.add_argument(
        "--explicit-prior",
        metavar="v1,..,vI",
        help="comma-separated class prior values (with --class-prior explicit)",
    )
    if include_roster:
        sub.add_argument(
            "--roster",
            metavar="PATH",
            help="site_id,class roster supplying labels for the empirical prior",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirimult",
        description=(
            "Bayesian classification of count vectors over categorical types "
            "via Dirichlet-multinomial posteriors"
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit per-class posteriors from a CSV")
    p_train.add_argument("training_csv")
    p_train.add_argument("--out", required=True, help="model file to write")
    _add_prior_flags(p_train, include_roster=True)
    p_train.set_defaults(func=_cmd_train)

    p_classify = sub.add_parser("classify", help="score a query CSV against a model")
    p_classify.add_argument("model")
    p_classify.add_argument("query_csv")
    p_classify.add_argument("--out", help="output CSV (default: stdout)")
    p_classify.add_argument(
        "--full-precision",
        action="store_true",
        help="print probabilities at full precision instead of 4 decimals",
    )
    p_classify.set_defaults(func=_cmd_classify)

    p_plot = sub.add_parser("plot", help="render SVG summaries of a model")
    p_plot.add_argument("model")
    p_plot.add_argument("--out", required=True, help="output directory")
    p_plot.set_defaults(func=_cmd_plot)

    p_eval = sub.add_parser(
        "eval", help="leave-one-out and Monte-Carlo oracle reports"
    )
    p_eval.add_argument("training_csv")
    p_eval.add_argument("--out", help="directory for CSV/text reports")
    p_eval.add_argument("--seed", type=int, help="master seed (or DIRIMULT_SEED)")
    p_eval.add_argument(
        "--oracle-samples",
        type=int,
        default=100_000,
        help="Monte-Carlo samples per oracle pair (default: 100000)",
    )
    p_eval.add_argument(
        "--oracle-queries",
        type=int,
        default=10,
        help="random queries per class for the oracle (default: 10)",
    )
    _add_prior_flags(p_eval, include_roster=True)
    p_eval.set_defaults(func=_cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; map to the validation code
        code = exc.code if isinstance(exc.code, int) else 0
        return EXIT_INVALID if code != 0 else EXIT_OK
    try:
        return args.func(args)
    except DirimultError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - anything else is a bug
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
