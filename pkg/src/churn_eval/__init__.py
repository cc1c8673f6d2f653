"""Profit-aware evaluation of churn prediction models."""
from .baselines import ConfusionCounts, accuracy, auc, confusion, f1, lift_index, top_decile_lift
from .economics import CostParams, Outcome, ProfitBreakdown, clv, contact_cost, customer_profit, offer_cost
from .emp import EmpParams, emp, maximum_profit
from .eprofits import EProfitsConfig, EProfitsResult, select_segment, total_eprofits
from .ingest import (
    AlignedView,
    CustomerRecord,
    Dataset,
    PredictionSet,
    join_validate,
    load_customers,
    load_predictions,
)
from .report import ComparisonTable, MetricReport, emit, evaluate_all, rank_models
from .survival import (
    RetentionConfig,
    RetentionMode,
    SurvivalCurve,
    average_retention_rate,
    fit_kaplan_meier,
    survival_at,
    tenure_retention_rate,
)

__version__ = "0.1.0"
