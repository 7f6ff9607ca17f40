import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kothe_chaos.scrambled_builder import (
    ScheduleError,
    SignBlock,
    build_nu,
    build_nu_bar,
    emit_family,
    nu_membership_bound,
    odd_primes,
)
from kothe_chaos.scrambled_builder.construction import _partition_ok
from kothe_chaos.sequences import Constant


def test_odd_primes():
    assert odd_primes(8) == [3, 5, 7, 11, 13, 17, 19, 23]
    assert len(odd_primes(25)) == 25


@given(st.integers(0, 50), st.integers(1, 400), st.integers(1, 9))
def test_sign_block_partitions_window(base, width, l):
    b = SignBlock(1, l, 3, 4, 8, base, base + width)
    assert _partition_ok(b)
    pos = sum(hi - lo for lo, hi in b.c0_intervals())
    neg = sum(hi - lo for lo, hi in b.c1_intervals())
    assert pos + neg == width
    signs = b.signs(base + 1, width)
    assert (signs > 0).sum() == pos
    # vectorised and scalar signs agree
    for j in range(base + 1, base + width + 1, max(1, width // 17)):
        assert b.sign(j) == signs[j - base - 1]


def test_first_sub_block_is_positive():
    b = SignBlock(1, 3, 3, 4, 8, 100, 130)
    assert [b.sign(j) for j in (101, 103, 104, 106, 107)] == [1, 1, -1, -1, 1]
    assert b.sign(100) == 0 and b.sign(131) == 0


def test_nu_rule(bundled_run):
    pipe, _ = bundled_run
    s = pipe.schedule
    nu = pipe.family.nu
    assert nu[s.Mk(4)] == 0.0 and nu[s.Mk(4) + 1] == 1.0
    assert nu[s.Mk(7)] == 1.0 and nu[s.Mk(7) + 1] == 0.0
    assert nu[s.Mk(8) + 1] == 2.0 and nu[s.Mk(11)] == 2.0
    assert nu[s.Mk(11) + 1] == 0.0


def test_nu_needs_depth(bundled_run):
    pipe, _ = bundled_run
    with pytest.raises(ScheduleError):
        build_nu(Constant(1.0), pipe.schedule, blocks=3)


def test_membership_bound_series():
    # tails exactly 2**-l: sum_{l>=1} l 2**-l = 2
    tails = [2.0 ** -l for l in range(1, 80)]
    assert nu_membership_bound(tails, 1, 1.0) == pytest.approx(2.0, rel=1e-14)
    partial = sum(l * 2.0 ** -l for l in range(1, 40))
    assert abs(nu_membership_bound(tails, 1, 1.0) - partial) < 1e-9


def test_layout_single_window(bundled_run):
    pipe, _ = bundled_run
    lay = pipe.layout
    assert [(b.n, b.l, b.base, b.top) for b in lay.blocks] == [(1, 1, 1528, 12280)]
    assert any("(n=2, l=1) skipped" in n for n in lay.notices)
    assert all(c.passed for c in lay.checks)


def test_nu_bar_signs_and_domination(bundled_run):
    pipe, _ = bundled_run
    nb = pipe.family.nu_bar
    assert nb[1529] == 2.0 and nb[1530] == -2.0 and nb[1531] == 2.0
    assert nb[100] == 0.0  # nu block 1 lies outside every layout window
    vals = nb.values(1, 13000)
    nuv = pipe.family.nu.values(1, 13000)
    assert np.all(np.abs(vals) <= np.abs(nuv))


def test_nu_bar_checks_pass(bundled_run):
    pipe, _ = bundled_run
    _, checks = build_nu_bar(pipe.family.nu, pipe.layout)
    assert {c.name for c in checks} == {"nu_bar_domination", "sign_alternation"}
    assert all(c.passed for c in checks)


def test_family_shift_closure(bundled_run):
    fam = bundled_run[0].family
    g = (0.5, 0)
    np.testing.assert_array_equal(fam.member(g).shifted(1).values(1500, 100),
                                  fam.member(fam.shift(g)).values(1500, 100))
    assert fam.shift((0.5, 7)) == (0.5, 8)


def test_emit_family_validation(bundled_run):
    nb = bundled_run[0].family.nu_bar
    fam = emit_family(nb, [0.5], 0)
    assert fam.generators == [(0.5, 0)]
    with pytest.raises(ValueError, match="distinct"):
        emit_family(nb, [0.5, 0.5], 0)
    with pytest.raises(ValueError, match=r"\|alpha-beta\| \* k/4 > 1"):
        emit_family(nb, [0.5, 0.55], 0)
    with pytest.raises(ValueError):
        emit_family(nb, [1.2], 0)
    with pytest.raises(ValueError):
        emit_family(nb, [0.5], -1)
