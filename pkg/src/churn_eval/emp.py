"""Expected Maximum Profit for customer churn.

Per-customer profit of targeting the customers above a cut-off, for offer
acceptance rate ``gamma``::

    P = clv * (gamma * (1 - delta) - phi) * pi0 * F0  -  clv * (delta + phi) * pi1 * F1

with ``delta = d / clv``, ``phi = f / clv``, ``pi0`` the churn prior, ``F0`` the
share of churners targeted and ``F1`` the share of non-churners targeted. EMP is
the expectation over ``gamma ~ Beta(alpha, beta)`` of the best achievable ``P``.
The best cut-off for a given gamma is always a vertex of the ROC convex hull, and
P is linear in gamma on each vertex, so the integral has a closed form in terms
of regularised incomplete beta functions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .baselines import _scores_labels

HULL_TOL = 1e-12


@dataclass(frozen=True)
class EmpParams:
    clv: float = 200.0
    offer_cost: float = 10.0
    contact_cost: float = 1.0
    beta_alpha: float = 6.0
    beta_beta: float = 14.0
    fraction_cap: float = 1.0

    def __post_init__(self):
        for name in ("clv", "offer_cost", "contact_cost", "beta_alpha", "beta_beta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.offer_cost >= self.clv:
            raise ValueError("offer_cost must be smaller than clv")
        if not 0.0 < self.fraction_cap <= 1.0:
            raise ValueError(f"fraction_cap must lie in (0, 1], got {self.fraction_cap}")

    @property
    def delta(self) -> float:
        return self.offer_cost / self.clv

    @property
    def phi(self) -> float:
        return self.contact_cost / self.clv

    @property
    def label(self) -> str:
        return (f"EMP ({float(self.fraction_cap)}, {self.clv:g}, "
                f"{self.offer_cost:g}, {self.contact_cost:g})")

    @property
    def metric_id(self) -> str:
        return f"emp:{float(self.fraction_cap)}:{self.clv:g}:{self.offer_cost:g}:{self.contact_cost:g}"


def roc_points(scores, labels):
    """Empirical ROC vertices (F1, F0) = (FPR, TPR), one per distinct score, from (0, 0) to (1, 1)."""
    s, y = _scores_labels(scores, labels)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # last index of each run of equal scores
    ends = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    tp = np.cumsum(y)[ends]
    fp = np.cumsum(~y)[ends]
    tpr = np.concatenate([[0.0], tp / y.sum()])
    fpr = np.concatenate([[0.0], fp / (~y).sum()])
    return fpr, tpr


def roc_convex_hull(fpr, tpr, tol=HULL_TOL):
    """Upper convex hull of the ROC points by monotone chain; collinear points dropped."""
    pts = sorted(zip(fpr, tpr))
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (ox, oy), (ax, ay) = hull[-2], hull[-1]
            cross = (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox)
            if cross >= -tol:
                hull.pop()
            else:
                break
        hull.append(p)
    # drop duplicate vertices (a repeated (0, 0) can survive the loop)
    out = [hull[0]]
    for p in hull[1:]:
        if abs(p[0] - out[-1][0]) > tol or abs(p[1] - out[-1][1]) > tol:
            out.append(p)
    return np.array([p[0] for p in out]), np.array([p[1] for p in out])


def truncate_hull(fpr, tpr, pi0, cap):
    """Cut the hull where the targeted fraction pi0*F0 + pi1*F1 reaches ``cap``."""
    if cap >= 1.0:
        return fpr, tpr
    pi1 = 1.0 - pi0
    eta = pi0 * tpr + pi1 * fpr
    keep_f, keep_t = [fpr[0]], [tpr[0]]
    for k in range(1, len(fpr)):
        if eta[k] <= cap:
            keep_f.append(fpr[k])
            keep_t.append(tpr[k])
            continue
        lam = (cap - eta[k - 1]) / (eta[k] - eta[k - 1])
        keep_f.append(fpr[k - 1] + lam * (fpr[k] - fpr[k - 1]))
        keep_t.append(tpr[k - 1] + lam * (tpr[k] - tpr[k - 1]))
        break
    return np.array(keep_f), np.array(keep_t)


def _prepare(scores, labels, params):
    s, y = _scores_labels(scores, labels)
    pi0 = float(y.mean())
    fpr, tpr = roc_convex_hull(*roc_points(s, y))
    fpr, tpr = truncate_hull(fpr, tpr, pi0, params.fraction_cap)
    return pi0, fpr, tpr


def profit_at(gamma, fpr, tpr, pi0, params: EmpParams):
    """P(gamma) at ROC point(s) (fpr, tpr); broadcasts."""
    clv, d, p = params.clv, params.delta, params.phi
    return clv * ((gamma * (1 - d) - p) * pi0 * tpr - (d + p) * (1 - pi0) * fpr)


def acceptance_breakpoints(fpr, tpr, pi0, params: EmpParams):
    """gamma above which moving from hull vertex k to k+1 pays off, for each segment."""
    d, p = params.delta, params.phi
    pi1 = 1.0 - pi0
    out = np.empty(len(fpr) - 1)
    for k in range(len(fpr) - 1):
        dt = tpr[k + 1] - tpr[k]
        df = fpr[k + 1] - fpr[k]
        if dt <= 0:
            out[k] = np.inf
        else:
            out[k] = (p + (d + p) * pi1 * df / (pi0 * dt)) / (1 - d)
    # concavity makes these non-decreasing; enforce it against rounding
    return np.maximum.accumulate(out)


def emp(scores, labels, params: EmpParams | None = None) -> float:
    params = params or EmpParams()
    pi0, fpr, tpr = _prepare(scores, labels, params)
    a, b = params.beta_alpha, params.beta_beta
    mean = a / (a + b)
    g = np.clip(acceptance_breakpoints(fpr, tpr, pi0, params), 0.0, 1.0)
    bounds = np.append(g, 1.0)
    clv, d, p = params.clv, params.delta, params.phi

    total = 0.0
    for k in range(1, len(fpr)):
        lo, hi = bounds[k - 1], bounds[k]
        if hi <= lo:
            continue
        mass = betainc(a, b, hi) - betainc(a, b, lo)
        first_moment = mean * (betainc(a + 1, b, hi) - betainc(a + 1, b, lo))
        slope = clv * (1 - d) * pi0 * tpr[k]
        intercept = -clv * (p * pi0 * tpr[k] + (d + p) * (1 - pi0) * fpr[k])
        total += slope * first_moment + intercept * mass
    return float(total)


def maximum_profit(scores, labels, params: EmpParams | None = None, gamma: float = 0.3) -> float:
    """Best P over all cut-offs for a fixed acceptance rate; never below 0 (target nobody)."""
    params = params or EmpParams()
    pi0, fpr, tpr = _prepare(scores, labels, params)
    return float(max(0.0, np.max(profit_at(gamma, fpr, tpr, pi0, params))))


def profit_maximising_fraction(scores, labels, params: EmpParams | None = None, gamma=None) -> float:
    """Share of customers targeted at the maximum-profit cut-off for ``gamma`` (Beta mean by default)."""
    params = params or EmpParams()
    if gamma is None:
        gamma = params.beta_alpha / (params.beta_alpha + params.beta_beta)
    pi0, fpr, tpr = _prepare(scores, labels, params)
    k = int(np.argmax(profit_at(gamma, fpr, tpr, pi0, params)))
    return float(pi0 * tpr[k] + (1 - pi0) * fpr[k])
