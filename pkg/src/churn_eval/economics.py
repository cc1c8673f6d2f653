"""Per-customer value, intervention costs and the three-case profit rule."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .survival import DEFAULT_CAP


@dataclass(frozen=True)
class CostParams:
    margin: float = 0.3
    cpo: float = 0.1
    contact_floor: float = 5.0
    contact_mult: float = 0.3

    def __post_init__(self):
        if not 0.0 < self.margin <= 1.0:
            raise ValueError(f"margin must lie in (0, 1], got {self.margin}")
        if not 0.0 < self.cpo < 1.0:
            raise ValueError(f"cpo must lie in (0, 1), got {self.cpo}")
        if self.contact_floor < 0:
            raise ValueError(f"contact_floor must be non-negative, got {self.contact_floor}")
        if self.contact_mult < 0:
            raise ValueError(f"contact_mult must be non-negative, got {self.contact_mult}")


class Outcome(str, enum.Enum):
    TRUE_POSITIVE = "TruePositive"
    FALSE_POSITIVE = "FalsePositive"
    NO_ACTION = "NoAction"


@dataclass(frozen=True)
class ProfitBreakdown:
    clv: float
    offer_cost: float
    contact_cost: float
    profit: float
    outcome: Outcome


def clv(revenue: float, margin: float, retention: float, cap: float = DEFAULT_CAP) -> float:
    """Monthly margin capitalised by 1 / (1 - r), with r capped so the result stays finite."""
    if revenue < 0:
        raise ValueError(f"revenue must be non-negative, got {revenue}")
    return revenue * margin / (1.0 - min(retention, cap))


def offer_cost(clv_value: float, cpo: float) -> float:
    return cpo * clv_value


def contact_cost(offer: float, c0: float, c1: float) -> float:
    return max(c0, c1 * offer)


def customer_profit(true_label: bool, predicted_label: bool, clv_value: float,
                    offer: float, contact: float) -> ProfitBreakdown:
    if not predicted_label:
        return ProfitBreakdown(clv_value, 0.0, 0.0, 0.0, Outcome.NO_ACTION)
    if true_label:
        return ProfitBreakdown(clv_value, offer, contact, clv_value - offer - contact,
                               Outcome.TRUE_POSITIVE)
    return ProfitBreakdown(clv_value, offer, contact, -offer - contact, Outcome.FALSE_POSITIVE)


def evaluate_customer(true_label, predicted_label, revenue, retention, cost: CostParams,
                      margin=None, cap=DEFAULT_CAP) -> ProfitBreakdown:
    value = clv(revenue, cost.margin if margin is None else margin, retention, cap)
    offer = offer_cost(value, cost.cpo)
    return customer_profit(true_label, predicted_label, value, offer,
                           contact_cost(offer, cost.contact_floor, cost.contact_mult))
