"""Loading customer datasets and model prediction files from CSV."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    DuplicateCustomerId,
    EmptyDataset,
    KeyMismatch,
    MissingColumn,
    ParseError,
    ScoreOutOfRange,
)

log = logging.getLogger(__name__)

DEFAULT_SCHEMA = {
    "id": "customer_id",
    "revenue": "monthly_revenue",
    "tenure": "tenure_months",
    "churn": "churned",
}
# Optional schema key; when mapped, the column supplies a fixed per-customer retention rate.
RETENTION_KEY = "retention"
DEFAULT_TRUTHY = frozenset({"Yes", "1", "true"})


@dataclass(frozen=True)
class CustomerRecord:
    customer_id: str
    monthly_revenue: float
    tenure_months: int
    churned: bool
    retention: float | None = None

    def __post_init__(self):
        if self.monthly_revenue < 0:
            raise ValueError(f"negative revenue for {self.customer_id!r}")
        if self.tenure_months < 0:
            raise ValueError(f"negative tenure for {self.customer_id!r}")


@dataclass(frozen=True)
class Dataset:
    records: tuple[CustomerRecord, ...]
    name: str = "dataset"

    def __post_init__(self):
        if not self.records:
            raise EmptyDataset(f"dataset {self.name!r} has no records")
        seen = set()
        for rec in self.records:
            if rec.customer_id in seen:
                raise DuplicateCustomerId(rec.customer_id)
            seen.add(rec.customer_id)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def ids(self) -> list[str]:
        return [r.customer_id for r in self.records]

    @property
    def tenures(self) -> list[int]:
        return [r.tenure_months for r in self.records]

    @property
    def churn_labels(self) -> list[bool]:
        return [r.churned for r in self.records]


@dataclass(frozen=True)
class Prediction:
    score: float | None = None
    label: bool | None = None


@dataclass(frozen=True)
class PredictionSet:
    model_name: str
    entries: Mapping[str, Prediction]
    threshold: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        for cid, p in self.entries.items():
            if p.score is None and p.label is None:
                raise ValueError(f"prediction for {cid!r} has neither score nor label")

    def label_for(self, customer_id: str) -> bool:
        p = self.entries[customer_id]
        if p.label is not None:
            return p.label
        return p.score >= self.threshold

    def score_for(self, customer_id: str) -> float | None:
        return self.entries[customer_id].score

    @property
    def has_scores(self) -> bool:
        return all(p.score is not None for p in self.entries.values())


@dataclass(frozen=True)
class AlignedView:
    """Customers paired with one model's predictions, in dataset order."""

    dataset: Dataset
    model_name: str
    labels: tuple[bool, ...]
    predicted: tuple[bool, ...]
    scores: tuple[float | None, ...] = field(repr=False)

    def __len__(self):
        return len(self.labels)

    @property
    def records(self):
        return self.dataset.records

    @property
    def has_scores(self) -> bool:
        return all(s is not None for s in self.scores)


def _read_rows(path):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        rows = list(reader)
    return header, rows


def _require(header, columns, path):
    for col in columns:
        if col not in header:
            raise MissingColumn(col, path)


def _parse_revenue(raw, row):
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ParseError(row, f"revenue {raw!r} is not a number") from None
    if not value >= 0 or value == float("inf"):
        raise ParseError(row, f"revenue {raw!r} must be a non-negative finite number")
    return value


def _parse_tenure(raw, row):
    try:
        value = int(str(raw).strip())
    except (TypeError, ValueError):
        # tolerate "12.0" style exports
        try:
            f = float(raw)
        except (TypeError, ValueError):
            raise ParseError(row, f"tenure {raw!r} is not an integer") from None
        if not f.is_integer():
            raise ParseError(row, f"tenure {raw!r} is not an integer")
        value = int(f)
    if value < 0:
        raise ParseError(row, f"tenure {raw!r} is negative")
    return value


def load_customers(
    path,
    schema: Mapping[str, str] | None = None,
    truthy: Iterable[str] = DEFAULT_TRUTHY,
    exclude: Iterable[str] = (),
    name: str | None = None,
) -> Dataset:
    """Read a customer CSV into a :class:`Dataset`.

    ``schema`` maps the logical keys ``id``, ``revenue``, ``tenure``, ``churn`` (and
    optionally ``retention``) to column names. Rows whose churn value is in
    ``exclude`` are dropped, e.g. Maven's ``"Joined"`` class. Row numbers in errors
    count the header as row 1.
    """
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    truthy = {t.strip() for t in truthy}
    exclude = {e.strip() for e in exclude}
    header, rows = _read_rows(path)
    required = [schema[k] for k in ("id", "revenue", "tenure", "churn")]
    ret_col = schema.get(RETENTION_KEY)
    if ret_col:
        required.append(ret_col)
    _require(header, required, path)

    records = []
    seen = {}
    dropped = 0
    for i, row in enumerate(rows, start=2):
        churn_raw = (row[schema["churn"]] or "").strip()
        if churn_raw in exclude:
            dropped += 1
            continue
        cid = (row[schema["id"]] or "").strip()
        if not cid:
            raise ParseError(i, "empty customer id")
        if cid in seen:
            raise DuplicateCustomerId(cid, i)
        seen[cid] = i
        retention = None
        if ret_col:
            try:
                retention = float(row[ret_col])
            except (TypeError, ValueError):
                raise ParseError(i, f"retention {row[ret_col]!r} is not a number") from None
            if not 0.0 < retention < 1.0:
                raise ParseError(i, f"retention {retention} must lie in (0, 1)")
        records.append(CustomerRecord(
            customer_id=cid,
            monthly_revenue=_parse_revenue(row[schema["revenue"]], i),
            tenure_months=_parse_tenure(row[schema["tenure"]], i),
            churned=churn_raw in truthy,
            retention=retention,
        ))
    if dropped:
        log.warning("excluded %d rows from %s by churn value %s", dropped, path, sorted(exclude))
    if not records:
        raise EmptyDataset(f"{path} contains no data rows")
    return Dataset(tuple(records), name=name or Path(path).stem)


def write_customers(dataset: Dataset, path, schema: Mapping[str, str] | None = None,
                    truthy_token="Yes", falsy_token="No"):
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    with_ret = any(r.retention is not None for r in dataset.records)
    cols = [schema["id"], schema["revenue"], schema["tenure"], schema["churn"]]
    if with_ret:
        cols.append(schema.get(RETENTION_KEY, RETENTION_KEY))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in dataset.records:
            row = [r.customer_id, repr(r.monthly_revenue), r.tenure_months,
                   truthy_token if r.churned else falsy_token]
            if with_ret:
                row.append("" if r.retention is None else repr(r.retention))
            w.writerow(row)


def _parse_label(raw, row):
    token = raw.strip().lower()
    if token in ("1", "true", "yes"):
        return True
    if token in ("0", "false", "no"):
        return False
    raise ParseError(row, f"label {raw!r} is not boolean")


def load_predictions(path, model_name: str, threshold: float = 0.5,
                     id_column="customer_id", score_column="score",
                     label_column="label") -> PredictionSet:
    header, rows = _read_rows(path)
    _require(header, [id_column], path)
    has_score = score_column in header
    has_label = label_column in header
    if not (has_score or has_label):
        raise MissingColumn(f"{score_column}|{label_column}", path)

    entries = {}
    for i, row in enumerate(rows, start=2):
        cid = (row[id_column] or "").strip()
        if not cid:
            raise ParseError(i, "empty customer id")
        if cid in entries:
            raise DuplicateCustomerId(cid, i)
        score = label = None
        raw = (row.get(score_column) or "").strip() if has_score else ""
        if raw:
            try:
                score = float(raw)
            except ValueError:
                raise ParseError(i, f"score {raw!r} is not a number") from None
            if not 0.0 <= score <= 1.0:
                raise ScoreOutOfRange(i, f"score {score} outside [0, 1]")
        raw = (row.get(label_column) or "").strip() if has_label else ""
        if raw:
            label = _parse_label(raw, i)
        if score is None and label is None:
            raise ParseError(i, f"no score or label for {cid!r}")
        entries[cid] = Prediction(score, label)
    return PredictionSet(model_name, entries, threshold)


def join_validate(dataset: Dataset, predictions: PredictionSet) -> AlignedView:
    ids = dataset.ids
    have = set(predictions.entries)
    missing = [cid for cid in ids if cid not in have]
    want = set(ids)
    extra = sorted(cid for cid in have if cid not in want)
    if missing or extra:
        raise KeyMismatch(missing[:10], extra[:10])
    return AlignedView(
        dataset=dataset,
        model_name=predictions.model_name,
        labels=tuple(r.churned for r in dataset.records),
        predicted=tuple(predictions.label_for(cid) for cid in ids),
        scores=tuple(predictions.score_for(cid) for cid in ids),
    )


def view_from_arrays(labels: Sequence[bool], predicted: Sequence[bool],
                     revenue: Sequence[float], tenure: Sequence[int] | None = None,
                     scores: Sequence[float] | None = None,
                     retention: Sequence[float] | None = None,
                     model_name: str = "model") -> AlignedView:
    """Build an aligned view directly from columns (ids are row indices)."""
    n = len(labels)
    tenure = tenure if tenure is not None else [0] * n
    recs = tuple(
        CustomerRecord(str(i), float(revenue[i]), int(tenure[i]), bool(labels[i]),
                       None if retention is None else float(retention[i]))
        for i in range(n)
    )
    return AlignedView(
        dataset=Dataset(recs, name="arrays"),
        model_name=model_name,
        labels=tuple(bool(x) for x in labels),
        predicted=tuple(bool(x) for x in predicted),
        scores=(None,) * n if scores is None else tuple(float(s) for s in scores),
    )
