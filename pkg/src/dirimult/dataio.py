"""Corpus CSV parsing, model-file serialization, and bundled fixtures.

Interchange formats
-------------------
Training CSV: header ``site_id,class,<type_1>,...,<type_J>`` followed by
one row per site.  ``#`` lines before the header may carry directives:
``# classes: a,b,c`` pins the class order (otherwise first appearance
wins) and ``# typology: ...`` renames the header's type columns (the
count must match).  ``#`` lines after the header are plain comments.

Query CSV: the same minus the ``class`` column.

Model file: a line-oriented text format with a ``format_version`` field,
one ``[class X]`` section per class, and alphas encoded either as exact
rationals ``k/J`` (when the float is exactly the quotient, as it is for
integer counts under the Perks prior) or as full-precision decimals, so
``parse_model(serialize_model(m))`` reproduces every float bit-for-bit.

All site and class names are UTF-8, preserved verbatim (spaces and
diacritics included); commas are the one reserved character.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources

from dirimult.classifier import ClassPrior, FittedModel
from dirimult.conjugate import CountVector, DirichletParams, Typology
from dirimult.errors import CsvFormatError, ModelFormatError, ValidationError

__all__ = [
    "TrainingRecord",
    "QueryRecord",
    "Corpus",
    "parse_training_csv",
    "parse_query_csv",
    "parse_roster_csv",
    "serialize_model",
    "parse_model",
    "format_concentration",
    "load_period_corpus",
    "load_site_roster",
    "load_demo_queries",
    "load_synthetic_corpus",
    "load_reference_model",
]

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainingRecord:
    site_id: str
    class_label: str
    counts: CountVector


@dataclass(frozen=True)
class QueryRecord:
    site_id: str
    counts: CountVector


@dataclass(frozen=True)
class Corpus:
    """A validated training corpus: typology, class order, records."""

    typology: Typology
    classes: tuple[str, ...]
    records: tuple[TrainingRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "records", tuple(self.records))
        if len(self.classes) != len(set(self.classes)):
            raise ValidationError("duplicate class labels in corpus")
        if not self.records:
            raise ValidationError("corpus has no records")
        seen: set[str] = set()
        for r in self.records:
            if r.class_label not in self.classes:
                raise ValidationError(
                    f"record {r.site_id!r} has undeclared class {r.class_label!r}"
                )
            if len(r.counts) != self.typology.n_types:
                raise ValidationError(
                    f"record {r.site_id!r} has {len(r.counts)} counts for "
                    f"{self.typology.n_types} types"
                )
            if r.site_id in seen:
                raise ValidationError(f"duplicate site_id {r.site_id!r}")
            seen.add(r.site_id)

    def class_totals(self) -> dict[str, CountVector]:
        """Summed counts per class (zero vector for empty classes)."""
        j = self.typology.n_types
        sums = {c: [0] * j for c in self.classes}
        for r in self.records:
            acc = sums[r.class_label]
            for k, y in enumerate(r.counts.counts):
                acc[k] += y
        return {c: CountVector(tuple(v)) for c, v in sums.items()}

    def class_sizes(self) -> dict[str, int]:
        sizes = {c: 0 for c in self.classes}
        for r in self.records:
            sizes[r.class_label] += 1
        return sizes


def _decode(data: bytes | str) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CsvFormatError(f"input is not valid UTF-8: {exc}") from None


def _split_rows(text: str) -> tuple[dict[str, str], list[tuple[int, list[str]]]]:
    """Directives from pre-header comments plus (line number, fields) rows."""
    directives: dict[str, str] = {}
    rows: list[tuple[int, list[str]]] = []
    before_header = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if before_header and ":" in body:
                key, _, value = body.partition(":")
                key = key.strip().lower()
                if key in ("classes", "typology"):
                    directives[key] = value.strip()
            continue
        before_header = False
        try:
            fields = next(csv.reader(io.StringIO(raw)))
        except csv.Error as exc:
            raise CsvFormatError(f"unreadable CSV row: {exc}", line=lineno) from None
        rows.append((lineno, [f.strip() for f in fields]))
    return directives, rows


def _parse_count(field: str, lineno: int, column: str) -> int:
    try:
        value = int(field)
    except ValueError:
        raise CsvFormatError(
            f"count {field!r} is not an integer", line=lineno, column=column
        ) from None
    if value < 0:
        raise CsvFormatError(
            f"count {field!r} is negative", line=lineno, column=column
        )
    return value


def _split_directive_list(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def parse_training_csv(data: bytes | str) -> Corpus:
    """Parse and fully validate a training corpus.

    Rejects duplicate site ids, negative / non-integer counts, ragged
    rows, empty input, and classes not covered by a ``# classes:``
    directive; errors name the offending line and column.
    """
    directives, rows = _split_rows(_decode(data))
    if not rows:
        raise CsvFormatError("empty file: expected a header row")
    header_line, header = rows[0]
    if len(header) < 4 or header[0] != "site_id" or header[1] != "class":
        raise CsvFormatError(
            "header must be 'site_id,class,<type...>' with at least 2 types",
            line=header_line,
        )
    type_labels = header[2:]
    if "typology" in directives:
        declared = _split_directive_list(directives["typology"])
        if len(declared) != len(type_labels):
            raise CsvFormatError(
                f"typology directive names {len(declared)} types but the "
                f"header has {len(type_labels)}"
            )
        type_labels = declared
    try:
        typology = Typology(tuple(type_labels))
    except ValidationError as exc:
        raise CsvFormatError(f"bad typology: {exc}", line=header_line) from None

    pinned = (
        _split_directive_list(directives["classes"])
        if "classes" in directives
        else None
    )
    if pinned is not None and len(pinned) != len(set(pinned)):
        raise CsvFormatError("classes directive repeats a class")

    records: list[TrainingRecord] = []
    seen_sites: dict[str, int] = {}
    appearance: list[str] = []
    for lineno, fields in rows[1:]:
        if len(fields) != len(header):
            raise CsvFormatError(
                f"expected {len(header)} fields, got {len(fields)}", line=lineno
            )
        site_id, class_label = fields[0], fields[1]
        if not site_id:
            raise CsvFormatError("empty site_id", line=lineno)
        if not class_label:
            raise CsvFormatError("empty class", line=lineno)
        if site_id in seen_sites:
            raise CsvFormatError(
                f"duplicate site_id {site_id!r} (first seen on line "
                f"{seen_sites[site_id]})",
                line=lineno,
            )
        seen_sites[site_id] = lineno
        if pinned is not None and class_label not in pinned:
            raise CsvFormatError(
                f"class {class_label!r} not in the classes directive",
                line=lineno,
            )
        if class_label not in appearance:
            appearance.append(class_label)
        counts = tuple(
            _parse_count(f, lineno, typology.labels[j])
            for j, f in enumerate(fields[2:])
        )
        records.append(TrainingRecord(site_id, class_label, CountVector(counts)))
    if not records:
        raise CsvFormatError("no data rows after the header")
    classes = tuple(pinned) if pinned is not None else tuple(appearance)
    return Corpus(typology=typology, classes=classes, records=tuple(records))


def parse_query_csv(data: bytes | str) -> list[QueryRecord]:
    """Parse an unlabeled query corpus; an empty file is an empty list.

    Zero-total rows are accepted here and flagged downstream; a typology
    mismatch against a model is the classifier's error, not the parser's.
    """
    text = _decode(data)
    _, rows = _split_rows(text)
    if not rows:
        return []
    header_line, header = rows[0]
    if len(header) < 3 or header[0] != "site_id":
        raise CsvFormatError(
            "header must be 'site_id,<type...>' with at least 2 types",
            line=header_line,
        )
    type_labels = header[1:]
    records: list[QueryRecord] = []
    seen: dict[str, int] = {}
    for lineno, fields in rows[1:]:
        if len(fields) != len(header):
            raise CsvFormatError(
                f"expected {len(header)} fields, got {len(fields)}", line=lineno
            )
        site_id = fields[0]
        if not site_id:
            raise CsvFormatError("empty site_id", line=lineno)
        if site_id in seen:
            raise CsvFormatError(
                f"duplicate site_id {site_id!r} (first seen on line "
                f"{seen[site_id]})",
                line=lineno,
            )
        seen[site_id] = lineno
        counts = tuple(
            _parse_count(f, lineno, type_labels[j])
            for j, f in enumerate(fields[1:])
        )
        records.append(QueryRecord(site_id, CountVector(counts)))
    return records


def parse_roster_csv(data: bytes | str) -> list[tuple[str, str]]:
    """Parse a ``site_id,class`` roster into (site, class) pairs.

    Unlike training corpora, repeated site names are allowed: inventories
    date *levels*, and one site can have levels in several classes.
    """
    _, rows = _split_rows(_decode(data))
    if not rows:
        raise CsvFormatError("empty file: expected a header row")
    header_line, header = rows[0]
    if header != ["site_id", "class"]:
        raise CsvFormatError("header must be 'site_id,class'", line=header_line)
    pairs: list[tuple[str, str]] = []
    for lineno, fields in rows[1:]:
        if len(fields) != 2:
            raise CsvFormatError(
                f"expected 2 fields, got {len(fields)}", line=lineno
            )
        site_id, class_label = fields
        if not site_id or not class_label:
            raise CsvFormatError("empty field", line=lineno)
        pairs.append((site_id, class_label))
    if not pairs:
        raise CsvFormatError("no data rows after the header")
    return pairs


def format_concentration(value: float, n_types: int) -> str:
    """Exact ``k/J`` when the float is exactly that quotient, else repr."""
    if value == int(value) and abs(value) < 2**53:
        return str(int(value))
    k = round(value * n_types)
    if k > 0 and k / n_types == value:
        return f"{k}/{n_types}"
    return repr(value)


def _parse_number(text: str, what: str) -> float:
    text = text.strip()
    try:
        if "/" in text:
            num, _, den = text.partition("/")
            return int(num) / int(den)
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise ModelFormatError(f"corrupted {what}: {text!r}") from None


def serialize_model(model: FittedModel) -> bytes:
    """Render a model to its text format; see :func:`parse_model`."""
    j = model.typology.n_types
    lines = [
        f"format_version: {MODEL_FORMAT_VERSION}",
        "typology: " + ",".join(model.typology.labels),
        "classes: " + ",".join(model.class_labels),
        "class_prior: " + ",".join(repr(p) for p in model.prior.probs),
    ]
    for label, post in zip(model.class_labels, model.posteriors):
        lines.append(f"[class {label}]")
        lines.append(
            "alpha: " + ",".join(format_concentration(a, j) for a in post.alpha)
        )
        lines.append("alpha_plus: " + format_concentration(post.alpha_plus, j))
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_model(data: bytes | str) -> FittedModel:
    """Parse a model file, bit-exactly reversing :func:`serialize_model`."""
    text = _decode(data)
    lines = [
        ln.strip()
        for ln in text.splitlines()
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not lines:
        raise ModelFormatError("empty model file")

    def key_value(line: str, key: str) -> str:
        prefix = key + ":"
        if not line.startswith(prefix):
            raise ModelFormatError(f"expected '{key}: ...', got {line!r}")
        return line[len(prefix):].strip()

    version = key_value(lines[0], "format_version")
    if version != str(MODEL_FORMAT_VERSION):
        raise ModelFormatError(
            f"unsupported format_version {version!r} "
            f"(this build reads version {MODEL_FORMAT_VERSION})"
        )
    if len(lines) < 4:
        raise ModelFormatError("truncated model file")
    typology_labels = _split_directive_list(key_value(lines[1], "typology"))
    class_labels = _split_directive_list(key_value(lines[2], "classes"))
    if not class_labels:
        raise ModelFormatError("model declares no classes")
    prior_fields = key_value(lines[3], "class_prior").split(",")
    prior = ClassPrior(
        tuple(_parse_number(p, "class_prior entry") for p in prior_fields)
    )
    try:
        typology = Typology(tuple(typology_labels))
    except ValidationError as exc:
        raise ModelFormatError(f"bad typology: {exc}") from None

    sections: dict[str, DirichletParams] = {}
    i = 4
    while i < len(lines):
        head = lines[i]
        if not (head.startswith("[class ") and head.endswith("]")):
            raise ModelFormatError(f"expected '[class ...]' section, got {head!r}")
        label = head[len("[class "):-1]
        if label in sections:
            raise ModelFormatError(f"duplicate section for class {label!r}")
        if i + 2 >= len(lines):
            raise ModelFormatError(f"truncated section for class {label!r}")
        alpha = tuple(
            _parse_number(f, f"alpha for class {label!r}")
            for f in key_value(lines[i + 1], "alpha").split(",")
        )
        alpha_plus = _parse_number(
            key_value(lines[i + 2], "alpha_plus"), f"alpha_plus for class {label!r}"
        )
        try:
            sections[label] = DirichletParams(alpha, alpha_plus=alpha_plus)
        except ValidationError as exc:
            raise ModelFormatError(f"bad parameters for class {label!r}: {exc}") from None
        i += 3

    missing = [c for c in class_labels if c not in sections]
    if missing:
        raise ModelFormatError(f"missing sections for classes: {missing}")
    extra = [c for c in sections if c not in class_labels]
    if extra:
        raise ModelFormatError(f"sections for undeclared classes: {extra}")
    try:
        return FittedModel(
            typology=typology,
            class_labels=tuple(class_labels),
            posteriors=tuple(sections[c] for c in class_labels),
            prior=prior,
        )
    except ValidationError as exc:
        raise ModelFormatError(str(exc)) from None


def _read_fixture(name: str) -> bytes:
    return resources.files("dirimult.data").joinpath(name).read_bytes()


def load_period_corpus() -> Corpus:
    """Bundled period-level arrowhead counts (one pooled row per period)."""
    return parse_training_csv(_read_fixture("arrowhead_period_counts.csv"))


def load_site_roster() -> list[tuple[str, str]]:
    """Bundled dated-level roster: (site level, period) pairs."""
    return parse_roster_csv(_read_fixture("site_roster.csv"))


def load_demo_queries() -> list[QueryRecord]:
    """Bundled demo query corpus (synthetic counts; see the file header)."""
    return parse_query_csv(_read_fixture("demo_queries.csv"))


def load_synthetic_corpus() -> Corpus:
    """Bundled labeled synthetic corpus used by the evaluation demos."""
    return parse_training_csv(_read_fixture("synthetic_sites.csv"))


def load_reference_model() -> FittedModel:
    """Bundled fitted model: period posteriors + the explicit class prior."""
    return parse_model(_read_fixture("reference_model.txt"))
