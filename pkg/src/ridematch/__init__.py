"""Stable multi-criteria ridesharing matching.

Judgment matrices from social preferences, TOPSIS ranking, stable matching
for equal and unequal driver/passenger sets, and the cost of stability
against an exact optimal assignment.
"""
from .assignment import ValueMatrix, brute_force_stable, max_weight_assignment, price_of_stability
from .common import (
    ConfigError, EmptyInputError, InvalidInputError, RideMatchError, SizeGuardError, UndefinedMetricError,
    UnsupportedInstanceError, fixture_path,
)
from .datagen import GenConfig, derive_matching_instance, generate_population, instance_from_closeness
from .metrics import MetricReport, egalitarian_cost, metric_report, regret_cost, sex_equality_cost
from .profiles import (
    FeedbackAggregate, JudgmentMatrix, Population, PreferenceSpec, Role, UserProfile, WeightVector,
    age_score, apply_feedback, binary_score, build_judgment_matrix, evaluation_to_score,
)
from .ranking import (
    RankingResult, TopsisTrace, closeness, ideal_solutions, normalize, separations, topsis_rank, weight,
    weight_superiority, wsm_rank,
)
from .stable import (
    BlockingPair, Matching, PreferenceProfileSet, driver_optimal, find_blocking_pairs, gale_shapley,
    passenger_optimal, sm_match, verify_formulation,
)

__version__ = "0.1.0"
