"""Schedules, the witness sequences nu and nu-bar, the invariant family
and its verifier."""

from .checks import Check, compare, sample_range, summarize
from .construction import (
    DEFAULT_ALPHAS,
    NuBar,
    ScrambledFamily,
    SignBlock,
    SignBlockLayout,
    build_nu,
    build_nu_bar,
    build_sign_layout,
    emit_family,
    nu_membership,
    nu_membership_bound,
    odd_primes,
)
from .schedule import (
    FAITHFUL_GAP,
    FAITHFUL_H,
    ConstructionSchedule,
    DensitySchedule,
    GapFunction,
    HypothesisNotEvidenced,
    ScheduleError,
    find_density_schedule,
    parse_gap,
    refine_gap_schedule,
    select_k_subsequence,
)
from .verify import CASE2_RANGES, ConstructionReport, aligned_horizons, verify_construction

__all__ = [
    "Check", "compare", "sample_range", "summarize",
    "DEFAULT_ALPHAS", "NuBar", "ScrambledFamily", "SignBlock", "SignBlockLayout",
    "build_nu", "build_nu_bar", "build_sign_layout", "emit_family", "nu_membership",
    "nu_membership_bound", "odd_primes",
    "FAITHFUL_GAP", "FAITHFUL_H", "ConstructionSchedule", "DensitySchedule", "GapFunction",
    "HypothesisNotEvidenced", "ScheduleError", "find_density_schedule", "parse_gap",
    "refine_gap_schedule", "select_k_subsequence",
    "CASE2_RANGES", "ConstructionReport", "aligned_horizons", "verify_construction",
]
