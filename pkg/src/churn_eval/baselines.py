"""Classification and ranking baselines: accuracy, F1, AUC, top-decile lift, lift index."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ScoresRequired, SingleClass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(labels, predicted=None) -> ConfusionCounts:
    """Counts from true labels and hard predictions; also accepts an AlignedView."""
    if predicted is None and hasattr(labels, "predicted"):
        labels, predicted = labels.labels, labels.predicted
    y = np.asarray(labels, dtype=bool)
    p = np.asarray(predicted, dtype=bool)
    if y.shape != p.shape:
        raise ValueError("labels and predictions differ in length")
    if y.size == 0:
        raise ValueError("need at least one observation")
    return ConfusionCounts(
        tp=int(np.sum(y & p)), fp=int(np.sum(~y & p)),
        tn=int(np.sum(~y & ~p)), fn=int(np.sum(y & ~p)),
    )


def accuracy(counts: ConfusionCounts) -> float:
    return (counts.tp + counts.tn) / counts.n


def f1(counts: ConfusionCounts) -> float:
    denom = 2 * counts.tp + counts.fp + counts.fn
    return 0.0 if denom == 0 else 2 * counts.tp / denom


def _scores_labels(scores, labels, need_negative=True):
    if scores is None or any(s is None for s in scores):
        raise ScoresRequired("metric needs a score for every customer")
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=bool)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(y.sum())
    if n_pos == 0 or (need_negative and n_pos == len(y)):
        raise SingleClass("metric needs both churners and non-churners"
                          if need_negative else "metric needs at least one churner")
    return s, y


def auc(scores, labels) -> float:
    """Mann-Whitney AUC; tied positive/negative pairs count one half."""
    s, y = _scores_labels(scores, labels)
    ranks = rankdata(s)  # average ranks for ties
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _rank_desc(s):
    # highest score first, input order among ties
    return np.argsort(-s, kind="stable")


def top_decile_lift(scores, labels) -> float:
    s, y = _scores_labels(scores, labels, need_negative=False)
    k = math.ceil(len(y) / 10)
    top = y[_rank_desc(s)[:k]]
    return float(top.mean() / y.mean())


def decile_sizes(n: int) -> list[int]:
    base, rem = divmod(n, 10)
    return [base + (1 if k < rem else 0) for k in range(10)]


def decile_churner_counts(scores, labels) -> list[int]:
    s, y = _scores_labels(scores, labels, need_negative=False)
    ranked = y[_rank_desc(s)]
    counts, start = [], 0
    for size in decile_sizes(len(y)):
        counts.append(int(ranked[start:start + size].sum()))
        start += size
    return counts


def lift_index(scores, labels) -> float:
    """Churners weighted by decile position: 1.0 for decile 1 down to 0.1 for decile 10."""
    counts = decile_churner_counts(scores, labels)
    weights = [(11 - k) / 10 for k in range(1, 11)]
    return sum(w * c for w, c in zip(weights, counts)) / sum(counts)
