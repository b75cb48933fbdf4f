"""Cross-validated prediction-error estimation for discrete factor models,
with exact oracles and a Monte Carlo harness verifying the estimator's
limit behaviour."""

from .errors import (
    DegenerateLabelsError,
    MdrError,
    NearSingularMatrixError,
    NullEventError,
    ValidationError,
)
from .estimator import (
    DEFAULT_SCHEDULE,
    EpsilonSchedule,
    ErrEstimate,
    FoldPartition,
    asymptotic_covariance_estimate,
    asymptotic_sd_estimate,
    cv_prediction_error,
    estimate_conditional,
    fold_partition,
    fold_penalty_estimate,
    influence_values,
    predict_regularized,
    threshold_estimate,
)
from .model import (
    Dataset,
    FactorSpace,
    FactorSubset,
    JointDistribution,
    PenaltyFunction,
    UNIT_PENALTY,
    cylinder_conditional,
    label_marginal,
    load_distribution,
    sample,
    save_distribution,
    support,
)
from .oracle import (
    Predictor,
    asymptotic_covariance,
    asymptotic_variance,
    balanced_penalty,
    consistency_defect,
    decided_set,
    high_risk_set,
    is_significant,
    label_advantage,
    optimal_predictor,
    prediction_error,
)
from .scenarios import PRESETS, generate_scenario, scenario_a
from .search import SearchReport, enumerate_subsets, rank_subsets

__version__ = "0.1.0"
