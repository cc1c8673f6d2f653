"""Aggregate e-Profits over the full population or a top-risk segment."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .economics import CostParams, Outcome, ProfitBreakdown, clv, evaluate_customer
from .errors import ScoresRequired, UnfittedCurve
from .ingest import AlignedView
from .survival import (
    RetentionConfig,
    RetentionMode,
    SurvivalCurve,
    average_retention_rate,
    tenure_retention_rate,
)


@dataclass(frozen=True)
class EProfitsConfig:
    segment_fraction: float = 1.0
    margin: float = 0.3
    retention_mode: RetentionMode = RetentionMode.ARR

    def __post_init__(self):
        object.__setattr__(self, "retention_mode", RetentionMode.parse(self.retention_mode))
        if not 0.0 < self.segment_fraction <= 1.0:
            raise ValueError(f"segment_fraction must lie in (0, 1], got {self.segment_fraction}")
        if not 0.0 < self.margin <= 1.0:
            raise ValueError(f"margin must lie in (0, 1], got {self.margin}")

    @property
    def label(self) -> str:
        return (f"e-Prof ({float(self.segment_fraction)}, {float(self.margin)}, "
                f"{self.retention_mode.value})")

    @property
    def metric_id(self) -> str:
        return f"eprof:{float(self.segment_fraction)}:{float(self.margin)}:{self.retention_mode.value}"


PAPER_CONFIGS = tuple(
    EProfitsConfig(f, 0.3, m)
    for f in (0.2, 1.0)
    for m in (RetentionMode.ARR, RetentionMode.TRR)
)


@dataclass(frozen=True)
class EProfitsResult:
    total: float
    n_targeted: int
    n_segment: int
    per_customer: tuple[ProfitBreakdown | None, ...] | None = None

    def to_dict(self, model, config: EProfitsConfig):
        return {
            "model": model,
            "fraction": config.segment_fraction,
            "margin": config.margin,
            "mode": config.retention_mode.value,
            "total": self.total,
            "n_targeted": self.n_targeted,
            "n_segment": self.n_segment,
        }

    def write_json(self, path, model, config):
        Path(path).write_text(json.dumps(self.to_dict(model, config), indent=2) + "\n",
                              encoding="utf-8")

    def write_breakdown_csv(self, path, view: AlignedView):
        if self.per_customer is None:
            raise ValueError("result was computed without a per-customer breakdown")
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["customer_id", "in_segment", "outcome", "clv", "offer_cost",
                        "contact_cost", "profit"])
            for rec, b in zip(view.records, self.per_customer):
                if b is None:
                    w.writerow([rec.customer_id, 0, "", "", "", "", repr(0.0)])
                else:
                    w.writerow([rec.customer_id, 1, b.outcome.value, repr(b.clv),
                                repr(b.offer_cost), repr(b.contact_cost), repr(b.profit)])


def segment_size(n: int, fraction: float) -> int:
    # guard against 0.7 * 10 == 7.000000000000001 rounding up to 8
    return max(1, min(n, math.ceil(round(fraction * n, 9))))


def select_segment(view: AlignedView, fraction: float, clv_per_customer: Sequence[float]) -> list[int]:
    """Indices of the top ``fraction`` of customers by churn score.

    Ties on score go to the higher CLV, then to the earlier row. The returned
    indices are in ranking order; ``fraction=1`` returns every index in input order.
    """
    n = len(view)
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    if fraction >= 1.0:
        return list(range(n))
    if not view.has_scores:
        raise ScoresRequired(f"model {view.model_name!r}: top-segment selection needs scores")
    order = sorted(range(n), key=lambda i: (-view.scores[i], -clv_per_customer[i], i))
    return order[:segment_size(n, fraction)]


def retention_rates(view: AlignedView, curve: SurvivalCurve | None,
                    retention: RetentionConfig, mode: RetentionMode) -> list[float]:
    """Per-customer r. Records carrying an explicit retention value use it as-is."""
    recs = view.records
    if all(r.retention is not None for r in recs):
        return [r.retention for r in recs]
    if curve is None:
        raise UnfittedCurve(f"{mode.value} retention needs a fitted survival curve")
    if mode is RetentionMode.ARR:
        arr = average_retention_rate(curve, view.dataset, retention.arr_point, retention.cap)
        return [arr if r.retention is None else r.retention for r in recs]
    return [
        tenure_retention_rate(curve, r.tenure_months, retention) if r.retention is None else r.retention
        for r in recs
    ]


def total_eprofits(view: AlignedView, curve: SurvivalCurve | None, cost: CostParams,
                   config: EProfitsConfig, retention: RetentionConfig | None = None,
                   keep_breakdown: bool = False) -> EProfitsResult:
    retention = retention or RetentionConfig(mode=config.retention_mode)
    rates = retention_rates(view, curve, retention, config.retention_mode)
    recs = view.records
    values = [clv(r.monthly_revenue, config.margin, rate, retention.cap) for r, rate in zip(recs, rates)]
    segment = select_segment(view, config.segment_fraction, values)

    breakdown: list[ProfitBreakdown | None] = [None] * len(view)
    for i in segment:
        breakdown[i] = evaluate_customer(view.labels[i], view.predicted[i], recs[i].monthly_revenue,
                                         rates[i], cost, margin=config.margin, cap=retention.cap)
    # summation in input order keeps totals independent of ranking order
    total = 0.0
    n_targeted = 0
    for b in breakdown:
        if b is None:
            continue
        total += b.profit
        n_targeted += b.outcome is not Outcome.NO_ACTION
    return EProfitsResult(total, n_targeted, len(segment),
                          tuple(breakdown) if keep_breakdown else None)
