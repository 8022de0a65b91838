"""One-bit-feedback multi-user scheduling: threshold optimization and
Monte-Carlo verification against the full-CSI upper bound."""

from .distributions import (
    RateDistribution,
    RayleighRateLaw,
    UserProfile,
    make_rayleigh_rate,
    partial_first_moment,
    sample_rate,
)
from .feedback_stats import (
    ConditionalStats,
    OrderingError,
    ThresholdAssignment,
    conditional_means,
    expected_user_rate,
    omega,
    phi_ordered,
    phi_region,
    scheduling_probabilities,
    weighted_sum_rate,
)
from .simulator import SimConfig, SimReport, schedule_full_csi, schedule_one_bit, simulate
from .threshold_opt import (
    BruteForce,
    Heuristic,
    Random,
    SolverConfig,
    SolverError,
    TwoUserPeaks,
    direct_maximize,
    optimize,
    optimize_m_user_region,
    optimize_two_user,
    select_regions,
    stationarity_residual,
    two_user_derivative_r1,
    verify_two_user_constraints,
)

__all__ = [
    "BruteForce",
    "ConditionalStats",
    "Heuristic",
    "OrderingError",
    "Random",
    "RateDistribution",
    "RayleighRateLaw",
    "SimConfig",
    "SimReport",
    "SolverConfig",
    "SolverError",
    "ThresholdAssignment",
    "TwoUserPeaks",
    "UserProfile",
    "conditional_means",
    "direct_maximize",
    "expected_user_rate",
    "make_rayleigh_rate",
    "omega",
    "optimize",
    "optimize_m_user_region",
    "optimize_two_user",
    "partial_first_moment",
    "phi_ordered",
    "phi_region",
    "sample_rate",
    "schedule_full_csi",
    "schedule_one_bit",
    "scheduling_probabilities",
    "select_regions",
    "simulate",
    "stationarity_residual",
    "two_user_derivative_r1",
    "verify_two_user_constraints",
    "weighted_sum_rate",
]
