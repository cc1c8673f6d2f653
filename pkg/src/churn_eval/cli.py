"""Command-line entry point: ``churn-eval {survival,evaluate,rank}``.

Exit codes: 0 success, 2 bad input or configuration, 3 a metric could not be computed.
Values from flags take precedence over the JSON config file (``--config`` or the
``CHURN_EVAL_CONFIG`` environment variable); each override is reported on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .economics import CostParams
from .emp import EmpParams
from .eprofits import PAPER_CONFIGS, EProfitsConfig
from .errors import InputError, MetricError
from .ingest import DEFAULT_SCHEMA, DEFAULT_TRUTHY, load_customers, load_predictions
from .report import emit, evaluate_all, rank_models, table_from_json
from .survival import RetentionConfig, RetentionMode, average_retention_rate, fit_kaplan_meier

log = logging.getLogger("churn_eval")

CONFIG_ENV = "CHURN_EVAL_CONFIG"
EXIT_OK, EXIT_INPUT, EXIT_METRIC = 0, 2, 3


@dataclass
class RunConfig:
    dataset: str | None = None
    schema: dict = field(default_factory=lambda: dict(DEFAULT_SCHEMA))
    truthy: list = field(default_factory=lambda: sorted(DEFAULT_TRUTHY))
    exclude: list = field(default_factory=list)
    predictions: dict = field(default_factory=dict)
    threshold: float = 0.5
    cost: CostParams = field(default_factory=CostParams)
    emp: EmpParams = field(default_factory=EmpParams)
    eprofits: list = field(default_factory=lambda: list(PAPER_CONFIGS))
    retention: RetentionConfig = field(default_factory=RetentionConfig)
    format: str = "markdown"
    out: str | None = None

    def to_dict(self) -> dict:
        return {
            "dataset": {"path": self.dataset, "schema": self.schema,
                        "truthy": list(self.truthy), "exclude": list(self.exclude)},
            "predictions": {"threshold": self.threshold, "files": dict(self.predictions)},
            "cost": asdict(self.cost),
            "emp": asdict(self.emp),
            "eprofits": [{"fraction": c.segment_fraction, "margin": c.margin,
                          "mode": c.retention_mode.value} for c in self.eprofits],
            "retention": {"mode": self.retention.mode.value,
                          "horizon_months": self.retention.horizon_months,
                          "cap": self.retention.cap, "arr_point": self.retention.arr_point},
            "output": {"format": self.format, "path": self.out},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        cfg = cls()
        ds = data.get("dataset") or {}
        cfg.dataset = ds.get("path")
        cfg.schema = {**DEFAULT_SCHEMA, **(ds.get("schema") or {})}
        cfg.truthy = list(ds.get("truthy", cfg.truthy))
        cfg.exclude = list(ds.get("exclude", cfg.exclude))
        preds = data.get("predictions") or {}
        cfg.predictions = dict(preds.get("files") or {})
        cfg.threshold = float(preds.get("threshold", cfg.threshold))
        cfg.cost = CostParams(**(data.get("cost") or {}))
        cfg.emp = EmpParams(**(data.get("emp") or {}))
        if data.get("eprofits"):
            cfg.eprofits = [EProfitsConfig(c["fraction"], c.get("margin", cfg.cost.margin),
                                           c.get("mode", "ARR")) for c in data["eprofits"]]
        cfg.retention = RetentionConfig(**(data.get("retention") or {}))
        out = data.get("output") or {}
        cfg.format = out.get("format", cfg.format)
        cfg.out = out.get("path")
        return cfg

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _pairs(items, what):
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key or not value:
            raise InputError(f"{what} expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _csv_list(text):
    return [t.strip() for t in text.split(",")]


def _emp_flag(text):
    parts = [p.strip() for p in text.split(",")]
    if not 3 <= len(parts) <= 6:
        raise InputError(f"--emp expects clv,d,f[,alpha,beta,cap], got {text!r}")
    names = ["clv", "offer_cost", "contact_cost", "beta_alpha", "beta_beta", "fraction_cap"]
    try:
        return {n: float(p) for n, p in zip(names, parts)}
    except ValueError:
        raise InputError(f"--emp values must be numbers, got {text!r}") from None


def _arr_point(text):
    if text in ("mean", "median"):
        return text
    try:
        return float(text)
    except ValueError:
        raise InputError(f"--arr-point expects mean, median or a number, got {text!r}") from None


def _in_file(data, section, key=None):
    if not data or section not in data or data[section] is None:
        return False
    return key is None or key in data[section]


def _override(in_file, current, new, label):
    if new is None or current == new:
        return current
    if in_file:
        log.warning("flag %s=%r overrides config file value %r", label, new, current)
    return new


def build_config(args) -> RunConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    file_data = None
    if path:
        try:
            file_data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"config {path} is not valid JSON: {exc}") from None
    try:
        cfg = RunConfig.from_dict(file_data) if file_data else RunConfig()
    except (TypeError, KeyError) as exc:
        raise InputError(f"bad config file {path}: {exc}") from None
    file_schema = ((file_data or {}).get("dataset") or {}).get("schema") or {}

    def take(section, key, current, new, flag):
        return _override(_in_file(file_data, section, key), current, new, flag)

    cfg.dataset = take("dataset", "path", cfg.dataset, args.dataset, "--dataset")
    for key, col in _pairs(args.schema, "--schema").items():
        cfg.schema[key] = _override(key in file_schema, cfg.schema.get(key), col, f"--schema {key}")
    if args.truthy:
        cfg.truthy = take("dataset", "truthy", cfg.truthy, _csv_list(args.truthy), "--truthy")
    if args.exclude:
        cfg.exclude = take("dataset", "exclude", cfg.exclude, _csv_list(args.exclude), "--exclude")

    ret = {}
    if args.horizon is not None:
        ret["horizon_months"] = take("retention", "horizon_months", cfg.retention.horizon_months,
                                     args.horizon, "--horizon")
    if args.cap is not None:
        ret["cap"] = take("retention", "cap", cfg.retention.cap, args.cap, "--cap")
    if args.arr_point is not None:
        ret["arr_point"] = take("retention", "arr_point", cfg.retention.arr_point,
                                _arr_point(args.arr_point), "--arr-point")
    if getattr(args, "retention", None):
        ret["mode"] = RetentionMode.parse(args.retention)
    cfg.retention = replace(cfg.retention, **ret)

    if not hasattr(args, "predictions"):
        return cfg
    preds = _pairs(args.predictions, "--predictions")
    if preds:
        cfg.predictions = take("predictions", "files", cfg.predictions, preds, "--predictions")
    cfg.threshold = take("predictions", "threshold", cfg.threshold, args.threshold, "--threshold")
    cost = {}
    for name in ("margin", "cpo", "contact_floor", "contact_mult"):
        value = getattr(args, name)
        if value is not None:
            flag = "--" + name.replace("_", "-")
            cost[name] = take("cost", name, getattr(cfg.cost, name), value, flag)
    cfg.cost = replace(cfg.cost, **cost)
    if args.emp:
        cfg.emp = replace(cfg.emp, **_emp_flag(args.emp))
    if args.fraction or args.retention:
        fractions = args.fraction or sorted({c.segment_fraction for c in cfg.eprofits})
        modes = [RetentionMode.parse(args.retention)] if args.retention else list(RetentionMode)
        cfg.eprofits = [EProfitsConfig(f, cfg.cost.margin, m) for f in fractions for m in modes]
    if args.margin is not None:
        cfg.eprofits = [replace(c, margin=args.margin) for c in cfg.eprofits]
    cfg.format = take("output", "format", cfg.format, args.format, "--format")
    cfg.out = take("output", "path", cfg.out, args.out, "--out")
    return cfg


def _load_dataset(cfg: RunConfig):
    if not cfg.dataset:
        raise InputError("no dataset given (--dataset or config file)")
    return load_customers(cfg.dataset, cfg.schema, truthy=cfg.truthy, exclude=cfg.exclude)


def _write_text(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def cmd_survival(args) -> int:
    cfg = build_config(args)
    data = _load_dataset(cfg)
    curve = fit_kaplan_meier(data.tenures, data.churn_labels)
    arr = average_retention_rate(curve, data, cfg.retention.arr_point, cfg.retention.cap)
    if not curve.event_times:
        log.warning("no churn events in %s; ARR clamped to cap %s", cfg.dataset, cfg.retention.cap)
    curve.to_csv(args.out or sys.stdout)
    print(f"ARR={arr:.6f}")
    return EXIT_OK


def _evaluate(cfg: RunConfig):
    data = _load_dataset(cfg)
    if not cfg.predictions:
        raise InputError("no prediction files given (--predictions name=path)")
    preds = [load_predictions(path, name, cfg.threshold) for name, path in cfg.predictions.items()]
    return evaluate_all(data, preds, cfg.cost, cfg.emp, cfg.eprofits, cfg.retention)


def cmd_evaluate(args) -> int:
    cfg = build_config(args)
    table = _evaluate(cfg)
    text = emit(table, cfg.format)
    _write_text(text, cfg.out)
    if cfg.out:
        Path(str(cfg.out) + ".config.json").write_text(cfg.to_json(), encoding="utf-8")
    return EXIT_OK


def cmd_rank(args) -> int:
    if args.table:
        try:
            table = table_from_json(Path(args.table).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InputError(f"cannot read table {args.table}: {exc}") from None
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{args.table} is not an emitted JSON table: {exc}") from None
    else:
        table = _evaluate(build_config(args))
    spec = table.column(args.by)
    for i, name in enumerate(rank_models(table, spec.metric_id), start=1):
        print(f"{i}\t{name}\t{table.value(name, spec.metric_id)!r}")
    return EXIT_OK


def _add_common(p):
    p.add_argument("--config", help=f"JSON run config (default: ${CONFIG_ENV})")
    p.add_argument("--dataset", help="customer CSV")
    p.add_argument("--schema", action="append", metavar="KEY=COLUMN",
                   help="map id/revenue/tenure/churn/retention to column names")
    p.add_argument("--truthy", help="comma-separated churn values meaning churned")
    p.add_argument("--exclude", help="comma-separated churn values whose rows are dropped")
    p.add_argument("--horizon", type=int, help="TRR horizon in months")
    p.add_argument("--cap", type=float, help="retention cap")
    p.add_argument("--arr-point", help="ARR evaluation point: mean, median or a tenure")


def _add_eval(p):
    p.add_argument("--predictions", action="append", metavar="NAME=PATH")
    p.add_argument("--threshold", type=float, help="score threshold for derived labels")
    p.add_argument("--margin", type=float)
    p.add_argument("--cpo", type=float)
    p.add_argument("--contact-floor", type=float)
    p.add_argument("--contact-mult", type=float)
    p.add_argument("--fraction", type=float, action="append", help="e-Profits segment fraction")
    p.add_argument("--retention", choices=["arr", "trr", "ARR", "TRR"])
    p.add_argument("--emp", metavar="CLV,D,F[,ALPHA,BETA,CAP]")
    p.add_argument("--format", choices=["csv", "json", "markdown"])
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="churn-eval", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("survival", help="fit Kaplan-Meier curve, print ARR")
    _add_common(p)
    p.add_argument("--out", help="curve CSV (time,survival)")
    p.set_defaults(func=cmd_survival)

    p = sub.add_parser("evaluate", help="compare models on every metric")
    _add_common(p)
    _add_eval(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rank", help="order models by one metric")
    _add_common(p)
    _add_eval(p)
    p.add_argument("--table", help="JSON table written by `evaluate --format json`")
    p.add_argument("--by", required=True, help="metric id or column label, e.g. eprof:0.2:0.3:TRR")
    p.set_defaults(func=cmd_rank)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except (InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_METRIC


if __name__ == "__main__":
    sys.exit(main())
