"""Identifiability and bounds of nonbinary unit-selection benefit functions."""

from .core import (
    BenefitFunction,
    BenefitTerm,
    Dataset,
    ExperimentalDistribution,
    Interval,
    ObservationalDistribution,
    ValidationReport,
    all_assignments,
    assignment_at,
    from_counts,
    load_dataset,
    term_index,
    validate,
)
from .engine import EngineConfig, bound_benefit, find_groups, identify, reduce
from .lp import Oracle, build_lp, oracle_benefit_bounds, oracle_query_bounds, solve_minmax
from .pcbounds import BoundsEvaluator, CounterfactualQuery, bounds_for_all_full_joints

__version__ = "0.1.0"
