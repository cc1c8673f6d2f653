"""Kaplan-Meier fitting and the two retention-rate modes derived from it."""
from __future__ import annotations

import bisect
import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyInput, LengthMismatch

EPS = 1e-6
DEFAULT_CAP = 0.995


class RetentionMode(str, enum.Enum):
    ARR = "ARR"
    TRR = "TRR"

    @classmethod
    def parse(cls, value) -> "RetentionMode":
        if isinstance(value, cls):
            return value
        return cls(str(value).upper())


@dataclass(frozen=True)
class SurvivalCurve:
    event_times: tuple[float, ...]
    survival_probs: tuple[float, ...]
    n_fitted: int

    def __call__(self, t):
        return survival_at(self, t)

    def to_csv(self, dest):
        """Write (time, survival) rows, starting from S(0) = 1, to a path or text stream."""
        if hasattr(dest, "write"):
            self._write_rows(dest)
        else:
            with Path(dest).open("w", newline="", encoding="utf-8") as fh:
                self._write_rows(fh)

    def _write_rows(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "survival"])
        w.writerow([0, repr(1.0)])
        for t, s in zip(self.event_times, self.survival_probs):
            w.writerow([_fmt_time(t), repr(s)])


def _fmt_time(t):
    t = float(t)
    return int(t) if t.is_integer() else t


@dataclass(frozen=True)
class RetentionConfig:
    mode: RetentionMode = RetentionMode.ARR
    horizon_months: int = 12
    cap: float = DEFAULT_CAP
    arr_point: str | float = "mean"

    def __post_init__(self):
        object.__setattr__(self, "mode", RetentionMode.parse(self.mode))
        if not 0.0 < self.cap < 1.0:
            raise ValueError(f"cap must lie in (0, 1), got {self.cap}")
        if int(self.horizon_months) != self.horizon_months or self.horizon_months < 1:
            raise ValueError(f"horizon_months must be a positive integer, got {self.horizon_months}")
        if not (self.arr_point in ("mean", "median") or isinstance(self.arr_point, (int, float))):
            raise ValueError(f"arr_point must be 'mean', 'median' or a number, got {self.arr_point!r}")


def fit_kaplan_meier(durations: Sequence[float], events: Sequence[bool]) -> SurvivalCurve:
    """Product-limit estimate of S(t).

    Only times with at least one event become steps. Observations censored at an
    event time are still counted in that time's risk set.
    """
    if len(durations) != len(events):
        raise LengthMismatch(f"{len(durations)} durations vs {len(events)} events")
    if len(durations) == 0:
        raise EmptyInput("cannot fit a survival curve to zero observations")
    durations = np.asarray(durations, dtype=float)
    if np.any(durations < 0) or not np.all(np.isfinite(durations)):
        raise ValueError("durations must be finite and non-negative")
    events = np.asarray(events, dtype=bool)

    order = np.argsort(durations, kind="stable")
    durations, events = durations[order], events[order]
    times, first = np.unique(durations, return_index=True)
    deaths = np.add.reduceat(events.astype(np.int64), first)
    at_risk = len(durations) - first

    out_t, out_s = [], []
    s = 1.0
    for t, d, n in zip(times, deaths, at_risk):
        if d == 0:
            continue
        s *= 1.0 - d / n
        out_t.append(float(t))
        out_s.append(float(s))
    return SurvivalCurve(tuple(out_t), tuple(out_s), len(durations))


def survival_at(curve: SurvivalCurve, t: float) -> float:
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    k = bisect.bisect_right(curve.event_times, t)
    return 1.0 if k == 0 else curve.survival_probs[k - 1]


def _clamp(r, cap):
    return min(max(r, EPS), cap)


def arr_evaluation_point(tenures: Sequence[float], point="mean") -> float:
    if point == "mean":
        return float(np.mean(tenures))
    if point == "median":
        return float(np.median(tenures))
    return float(point)


def average_retention_rate(curve: SurvivalCurve, dataset, point="mean", cap: float = DEFAULT_CAP) -> float:
    """One global retention rate: S at the population's mean (or median/fixed) tenure."""
    tenures = dataset.tenures if hasattr(dataset, "tenures") else list(dataset)
    return _clamp(survival_at(curve, arr_evaluation_point(tenures, point)), cap)


def conditional_survival(curve: SurvivalCurve, tenure: float, horizon: float) -> float | None:
    """S(tenure + horizon) / S(tenure), or None where S(tenure) is zero."""
    base = survival_at(curve, tenure)
    if base <= 0.0:
        return None
    return survival_at(curve, tenure + horizon) / base


def tenure_retention_rate(curve: SurvivalCurve, tenure: float, config: RetentionConfig | None = None) -> float:
    config = config or RetentionConfig(mode=RetentionMode.TRR)
    r = conditional_survival(curve, tenure, config.horizon_months)
    if r is None:
        return EPS
    return _clamp(r, config.cap)

