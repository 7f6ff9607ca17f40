"""Backward shifts on Köthe sequence spaces and invariant distributionally
scrambled sets, computed with certified error bounds."""

from .dc_stats import (
    DEFAULT_HORIZONS,
    DistributionalProfile,
    FamilyReport,
    PairVerdict,
    classify_pair,
    phi_n,
    phi_n_naive,
    profile,
    profile_to_csv,
    verify_scrambled_family,
)
from .kernels import BACKEND
from .kothe_space import (
    KotheSpace,
    MetricValue,
    TailBudget,
    UncertifiedTailError,
    check_continuity,
    membership,
    metric_d,
    orbit_distance_bounds,
    seminorm,
    seminorms,
    validate_kothe,
)
from .matrices import parse_matrix
from .sequences import parse_sequence
from .shift_ops import backward_shift, iterate, tail, weighted_to_unweighted, window

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DEFAULT_HORIZONS", "DistributionalProfile", "FamilyReport", "KotheSpace",
    "MetricValue", "PairVerdict", "TailBudget", "UncertifiedTailError", "backward_shift",
    "check_continuity", "classify_pair", "iterate", "membership", "metric_d",
    "orbit_distance_bounds", "parse_matrix", "parse_sequence", "phi_n", "phi_n_naive",
    "profile", "profile_to_csv", "seminorm", "seminorms", "tail", "validate_kothe",
    "verify_scrambled_family", "weighted_to_unweighted", "window",
]
