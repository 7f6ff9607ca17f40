import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kothe_chaos.dc_stats import (
    DEFAULT_HORIZONS,
    classify_pair,
    phi_n,
    phi_n_naive,
    profile,
    profile_to_csv,
    verify_scrambled_family,
)
from kothe_chaos.kothe_space import KotheSpace
from kothe_chaos.matrices import PowerMatrix
from kothe_chaos.sequences import Blocks, Constant, FiniteSupport, Zero

T_GRID = [0.05, 0.1, 0.2, 0.4, 0.5, 0.7]


def test_closed_form_counts(geo_space):
    for n in (1, 7, 100, 2000):
        assert phi_n(Zero(), Constant(1.0), n, 0.5, geo_space) == (0, 0)
        assert phi_n(Zero(), Constant(1.0), n, 0.7, geo_space) == (n, 0)


def test_phi_n_argument_checks(geo_space):
    with pytest.raises(ValueError):
        phi_n(Zero(), Constant(1.0), 0, 0.5, geo_space)
    with pytest.raises(ValueError):
        phi_n(Zero(), Constant(1.0), 5, 0.0, geo_space)


pairs = st.lists(st.tuples(st.integers(1, 80), st.floats(-2, 2, allow_nan=False)), max_size=6)


@settings(max_examples=25, deadline=None)
@given(pairs, pairs, st.integers(1, 90), st.sampled_from([0.01, 0.2, 0.5]))
def test_incremental_matches_naive(a, b, n, t):
    sp = KotheSpace(PowerMatrix(), 1.0, tol=1e-6)
    x, y = FiniteSupport(a), FiniteSupport(b)
    assert phi_n(x, y, n, t, sp) == phi_n_naive(x, y, n, t, sp)


def test_profile_counts_are_monotone(geo_space):
    x = Blocks([(10, 40, 1.0), (100, 300, -1.0)])
    prof = profile(Zero(), x, T_GRID, [64, 256, 512], geo_space)
    assert prof.counts.shape == (3, 6)
    assert np.all(np.diff(prof.counts, axis=0) >= 0)
    assert np.all(np.diff(prof.counts, axis=1) >= 0)
    assert np.all(prof.lower_est <= prof.upper_est)


def test_profile_rejects_unsorted(geo_space):
    with pytest.raises(ValueError):
        profile(Zero(), Constant(1.0), [0.5, 0.1], [10], geo_space)
    with pytest.raises(ValueError):
        profile(Zero(), Constant(1.0), [0.1], [10, 5], geo_space)


def test_profile_csv_format(geo_space):
    text = profile_to_csv(profile(Zero(), Constant(1.0), [0.7], [4], geo_space))
    lines = text.splitlines()
    assert lines[0] == "n,t,count,ratio,ambiguous"
    assert lines[1] == "4,0.69999999999999996,4,1,0"


def test_constant_distance_pair_is_separated_but_never_proximal(geo_space):
    # d = 2/3 at every iterate: far at eps = 0.4, never below t = 0.5
    v = classify_pair(Zero(), Constant(1.0), 0.4, T_GRID, DEFAULT_HORIZONS, 0.1, geo_space)
    assert v.verdict == "inconclusive"
    assert not v.proximality_ok and v.separation_ok
    assert v.separation_witness["lower_est"] == 0.0


def test_identical_points_refuted(geo_space):
    x = Constant(1.0)
    assert classify_pair(x, x, 0.4, T_GRID, [8], 0.1, geo_space).verdict == "refuted_at_horizon"
    assert classify_pair(x * 1.0, x, 0.4, T_GRID, [8], 0.1, geo_space).verdict == "refuted_at_horizon"


def test_epsilon_must_be_in_grid(geo_space):
    with pytest.raises(ValueError):
        classify_pair(Zero(), Constant(1.0), 0.3, T_GRID, [8], 0.1, geo_space)


def test_pair_with_both_behaviours_is_consistent(geo_space):
    # far on (0, 1000], then zero: close for most of the longest horizon,
    # far for almost all of the first one
    x = Blocks([(0, 1000, 1.0)])
    v = classify_pair(Zero(), x, 0.4, T_GRID, [900, 100000], 0.1, geo_space)
    assert v.verdict == "consistent_with_DC_pair"
    assert v.separation_witness["at_horizon"] == 900


class _Fam:
    def __init__(self, gens):
        self.generators = gens

    def member(self, g):
        return Blocks([(0, 50 * (g + 1), 1.0)])


def test_family_duplicates_refuted(geo_space):
    r = verify_scrambled_family(_Fam([0, 1, 1]), 5, 0.4, T_GRID, [64], 0.1, geo_space)
    assert r.duplicate and r.counts["refuted_at_horizon"] == 1


def test_family_sampling_is_seeded(geo_space):
    a = verify_scrambled_family(_Fam(list(range(6))), 4, 0.4, T_GRID, [64, 512], 0.1, geo_space, seed=3)
    b = verify_scrambled_family(_Fam(list(range(6))), 4, 0.4, T_GRID, [64, 512], 0.1, geo_space, seed=3)
    assert a.as_dict() == b.as_dict() and a.pairs_checked == 4
