
import pytest

from kothe_chaos.kothe_space import KotheSpace
from kothe_chaos.matrices import GeometricMatrix
from kothe_chaos.scrambled_builder import (
    FAITHFUL_GAP,
    FAITHFUL_H,
    DensitySchedule,
    HypothesisNotEvidenced,
    ScheduleError,
    build_nu,
    find_density_schedule,
    parse_gap,
    refine_gap_schedule,
    select_k_subsequence,
)
from kothe_chaos.sequences import Constant, Zero

GEO = KotheSpace(GeometricMatrix(0.5), 1.0)
ONES = Constant(1.0)


def test_gap_rules():
    assert parse_gap("linear(1,8)")(10) == 18
    assert parse_gap("4^M")(3) == 64
    assert parse_gap("power(2)")(5) == 32
    assert FAITHFUL_GAP(4) == 256 and FAITHFUL_H(4) == 16
    with pytest.raises(ValueError):
        parse_gap("cubic(1)")


def test_density_schedule_constant_separation():
    ds = find_density_schedule(Zero(), ONES, 0.5, [0.5, 0.25, 0.1], 1024, GEO)
    assert ds.N == [2, 4, 8]
    assert ds.densities == [1.0, 1.0, 1.0]


def test_density_schedule_fails_for_equal_points():
    with pytest.raises(HypothesisNotEvidenced, match="hypothesis not evidenced below horizon_cap") as ei:
        find_density_schedule(ONES, ONES, 0.5, [0.5], 256, GEO)
    assert ei.value.k == 1


def test_density_schedule_half_threshold():
    from kothe_chaos.sequences import Blocks

    y = Blocks([(0, 10, 1.0)])  # separated for the first ten iterates only
    ds = find_density_schedule(Zero(), y, 0.5, [0.5], 64, GEO)
    assert ds.densities[0] >= 0.5


def test_density_schedule_rejects_bad_input():
    with pytest.raises(ValueError):
        find_density_schedule(Zero(), ONES, 0.0, [0.5], 10, GEO)
    with pytest.raises(ValueError):
        DensitySchedule([2, 4], [1.0, 0.5], 0.5, [0.5, 0.5], 10)


def _scaled(k_max, cap=10 ** 4):
    ds = find_density_schedule(Zero(), ONES, 0.5, lambda k: 1 / (k + 1), cap, GEO, range(1, cap + 1))
    return refine_gap_schedule(ds, parse_gap("linear(1,8)"), ONES, GEO, k_max,
                               index_cap=cap, h=parse_gap("linear(0.5,4)"))


def test_scaled_schedule_six_terms():
    s = _scaled(6)
    assert s.M == [4, 16, 40, 88, 184, 376]
    assert all(c.passed and c.certified for c in s.checks())
    for k, c in enumerate(s.tail_checks, start=1):
        assert c.lhs == pytest.approx(2.0 ** (2 - s.Mk(k)), rel=1e-12)


def test_empty_schedule():
    s = _scaled(0)
    assert s.M == [] and s.checks() == []


def test_faithful_gap_reaches_cap_at_k3():
    cap = 10 ** 4
    ds = find_density_schedule(Zero(), ONES, 0.5, lambda k: 1 / (k + 1), cap, GEO, range(1, cap + 1))
    with pytest.raises(ScheduleError, match="index cap exceeded at k=3") as ei:
        refine_gap_schedule(ds, FAITHFUL_GAP, ONES, GEO, 5, h=FAITHFUL_H, mode="faithful")
    part = ei.value.partial
    assert part.M == [4, 260]
    assert all(c.passed for c in part.checks())


def test_k_subsequence_parity():
    s = _scaled(14, 10 ** 5)
    select_k_subsequence(s, build_nu(ONES, s), GEO)
    ks = s.k_seq
    assert ks[0] == 1
    assert all(ks[i] % 4 == 0 for i in range(1, len(ks), 2))
    assert all(ks[i] == ks[i - 1] + 3 for i in range(2, len(ks), 2))
    assert ks == [1, 4, 7, 8, 11, 12]
    assert s.tail10_checks and all(c.passed for c in s.tail10_checks)
    s.check_invariants()


def test_invariants_catch_tampering():
    s = _scaled(6)
    s.M[3] = s.M[2] + 1
    with pytest.raises(AssertionError):
        s.check_invariants()
