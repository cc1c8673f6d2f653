"""Evaluate several models on one dataset and emit comparison tables."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from . import baselines
from .economics import CostParams
from .emp import EmpParams, emp
from .eprofits import PAPER_CONFIGS, EProfitsConfig, total_eprofits
from .errors import ChurnEvalError, NoModels, ScoresRequired, UnavailableMetric
from .ingest import AlignedView, Dataset, PredictionSet, join_validate
from .survival import RetentionConfig, SurvivalCurve, fit_kaplan_meier

UNAVAILABLE = "—"


@dataclass(frozen=True)
class MetricSpec:
    metric_id: str
    label: str
    kind: str
    config: dict = field(default_factory=dict, hash=False, compare=False)

    @property
    def is_currency(self) -> bool:
        return self.kind in ("eprof", "emp")


@dataclass(frozen=True)
class MetricReport:
    model_name: str
    metric: MetricSpec
    value: float | None


@dataclass
class ComparisonTable:
    models: list[str]
    columns: list[MetricSpec]
    values: dict[tuple[str, str], float | None]

    def value(self, model, metric_id):
        return self.values[(model, metric_id)]

    def column(self, metric_id) -> MetricSpec:
        for c in self.columns:
            if metric_id in (c.metric_id, c.label):
                return c
        raise UnavailableMetric(
            f"unknown metric {metric_id!r}; valid ids: " + ", ".join(c.metric_id for c in self.columns))

    @property
    def reports(self) -> list[MetricReport]:
        return [MetricReport(m, c, self.values[(m, c.metric_id)])
                for m in self.models for c in self.columns]

    def best(self, metric_id) -> set[str]:
        vals = {m: self.values[(m, metric_id)] for m in self.models}
        avail = [v for v in vals.values() if v is not None]
        if not avail:
            return set()
        top = max(avail)
        return {m for m, v in vals.items() if v is not None and v == top}


def _eprof_spec(cfg: EProfitsConfig) -> MetricSpec:
    return MetricSpec(cfg.metric_id, cfg.label, "eprof", {
        "fraction": cfg.segment_fraction, "margin": cfg.margin, "mode": cfg.retention_mode.value})


def _emp_config(p: EmpParams) -> dict:
    return {"fraction_cap": p.fraction_cap, "clv": p.clv, "d": p.offer_cost, "f": p.contact_cost,
            "alpha": p.beta_alpha, "beta": p.beta_beta}


def metric_battery(configs: Sequence[EProfitsConfig] = PAPER_CONFIGS,
                   emp_params: EmpParams | None = None,
                   emp_caps: Sequence[float] = (0.2, 1.0)) -> list[tuple[MetricSpec, object]]:
    """Columns in table order, each paired with what is needed to compute it."""
    emp_params = emp_params or EmpParams()
    cols = [
        (MetricSpec("f1", "F1", "f1"), None),
        (MetricSpec("accuracy", "Acc.", "accuracy"), None),
        (MetricSpec("auc", "AUC", "auc"), None),
        (MetricSpec("emp", "EMP", "emp", _emp_config(emp_params)), emp_params),
        (MetricSpec("tdl", "TDL", "tdl"), None),
        (MetricSpec("lift_index", "Lift Index", "lift_index"), None),
    ]
    cols += [(_eprof_spec(c), c) for c in configs]
    caps = sorted(set(emp_caps) | {emp_params.fraction_cap})
    for cap in caps:
        p = replace(emp_params, fraction_cap=cap)
        cols.append((MetricSpec(p.metric_id, p.label, "emp", _emp_config(p)), p))
    return cols


def _compute(kind, arg, view: AlignedView, curve, cost, retention):
    if kind == "f1":
        return baselines.f1(baselines.confusion(view))
    if kind == "accuracy":
        return baselines.accuracy(baselines.confusion(view))
    if kind == "eprof":
        return total_eprofits(view, curve, cost, arg, replace(retention, mode=arg.retention_mode)).total
    if not view.has_scores:
        raise ScoresRequired(f"{kind} needs scores")
    if kind == "auc":
        return baselines.auc(view.scores, view.labels)
    if kind == "tdl":
        return baselines.top_decile_lift(view.scores, view.labels)
    if kind == "lift_index":
        return baselines.lift_index(view.scores, view.labels)
    if kind == "emp":
        return emp(view.scores, view.labels, arg)
    raise ValueError(f"unknown metric kind {kind!r}")


def evaluate_model(view, battery, curve, cost, retention) -> dict[str, float | None]:
    out = {}
    for spec, arg in battery:
        try:
            out[spec.metric_id] = _compute(spec.kind, arg, view, curve, cost, retention)
        except ScoresRequired:
            out[spec.metric_id] = None
        except ChurnEvalError as exc:
            exc.args = (f"model {view.model_name!r}, {spec.label}: {exc}",)
            raise
    return out


def evaluate_all(dataset: Dataset, predictions: Sequence[PredictionSet],
                 cost: CostParams | None = None, emp_params: EmpParams | None = None,
                 configs: Sequence[EProfitsConfig] = PAPER_CONFIGS,
                 retention: RetentionConfig | None = None,
                 curve: SurvivalCurve | None = None,
                 max_workers: int | None = None) -> ComparisonTable:
    if not predictions:
        raise NoModels("no prediction sets to evaluate")
    names = [p.model_name for p in predictions]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate model names: {names}")
    cost = cost or CostParams()
    retention = retention or RetentionConfig()
    if curve is None:
        curve = fit_kaplan_meier(dataset.tenures, dataset.churn_labels)
    battery = metric_battery(configs, emp_params)

    views = []
    for p in predictions:
        try:
            views.append(join_validate(dataset, p))
        except ChurnEvalError as exc:
            exc.args = (f"model {p.model_name!r}: {exc}",)
            raise

    def run(view):
        return evaluate_model(view, battery, curve, cost, retention)

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            results = list(pool.map(run, views))
    else:
        results = [run(v) for v in views]

    values = {}
    for view, res in zip(views, results):
        for mid, v in res.items():
            values[(view.model_name, mid)] = v
    return ComparisonTable(sorted(names), [spec for spec, _ in battery], values)


def rank_models(table: ComparisonTable, by: str) -> list[str]:
    spec = table.column(by)
    vals = {m: table.value(m, spec.metric_id) for m in table.models}
    missing = sorted(m for m, v in vals.items() if v is None)
    if missing:
        raise UnavailableMetric(f"{spec.label} is unavailable for {missing}")
    return sorted(table.models, key=lambda m: (-vals[m], m))


def _fmt(v, spec: MetricSpec) -> str:
    if v is None:
        return UNAVAILABLE
    return f"{v:.2f}" if spec.is_currency else f"{v:.4f}"


def render_csv(table: ComparisonTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["model"] + [c.label for c in table.columns])
    for m in table.models:
        w.writerow([m] + [UNAVAILABLE if (v := table.value(m, c.metric_id)) is None else repr(v)
                          for c in table.columns])
    return buf.getvalue()


def render_json(table: ComparisonTable) -> str:
    rows = []
    for m in table.models:
        rows.append({
            "model": m,
            "metrics": [
                {"id": c.metric_id, "label": c.label, "metric": c.kind,
                 "config": c.config, "value": table.value(m, c.metric_id)}
                for c in table.columns
            ],
        })
    return json.dumps(rows, indent=2, ensure_ascii=False) + "\n"


def render_markdown(table: ComparisonTable) -> str:
    best = {c.metric_id: table.best(c.metric_id) for c in table.columns}
    lines = [
        "| Name | " + " | ".join(c.label for c in table.columns) + " |",
        "|---|" + "|".join("---:" for _ in table.columns) + "|",
    ]
    for m in table.models:
        cells = []
        for c in table.columns:
            text = _fmt(table.value(m, c.metric_id), c)
            cells.append(f"**{text}**" if m in best[c.metric_id] else text)
        lines.append(f"| {m} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


RENDERERS = {"csv": render_csv, "json": render_json, "markdown": render_markdown}


def render(table: ComparisonTable, fmt: str) -> str:
    if not table.models:
        raise NoModels("empty table")
    try:
        return RENDERERS[fmt](table)
    except KeyError:
        raise ValueError(f"unknown format {fmt!r}; expected one of {sorted(RENDERERS)}") from None


def emit(table: ComparisonTable, fmt: str, destination=None) -> str:
    """Render ``table`` and write it to ``destination`` (path or text stream) if given."""
    text = render(table, fmt)
    if destination is None:
        return text
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with Path(destination).open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def table_from_json(text: str) -> ComparisonTable:
    rows = json.loads(text)
    if not isinstance(rows, list) or not rows:
        raise ValueError("expected a non-empty JSON array of model rows")
    columns = [MetricSpec(m["id"], m["label"], m["metric"], m.get("config") or {})
               for m in rows[0]["metrics"]]
    values = {}
    for row in rows:
        for m in row["metrics"]:
            values[(row["model"], m["id"])] = m["value"]
    return ComparisonTable(sorted(r["model"] for r in rows), columns, values)


def radar_csv(table: ComparisonTable) -> str:
    """Min-max normalised metric vector per model; constant columns map to 1."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["model"] + [c.label for c in table.columns])
    ranges = {}
    for c in table.columns:
        vals = [v for m in table.models if (v := table.value(m, c.metric_id)) is not None]
        ranges[c.metric_id] = (min(vals), max(vals)) if vals else None
    for m in table.models:
        row = [m]
        for c in table.columns:
            v = table.value(m, c.metric_id)
            rng = ranges[c.metric_id]
            if v is None:
                row.append("")
            elif math.isclose(rng[0], rng[1], rel_tol=0, abs_tol=0):
                row.append(repr(1.0))
            else:
                row.append(repr((v - rng[0]) / (rng[1] - rng[0])))
        w.writerow(row)
    return buf.getvalue()
