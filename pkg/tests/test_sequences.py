import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kothe_chaos.matrices import GeometricMatrix
from kothe_chaos.sequences import (
    BlockScaled,
    Blocks,
    Combination,
    Constant,
    FiniteSupport,
    Geometric,
    Scaled,
    Shifted,
    Tail,
    Window,
    Zero,
    basis,
    parse_sequence,
)

entries = st.lists(st.tuples(st.integers(1, 60), st.floats(-5, 5, allow_nan=False)), max_size=12)


@given(entries, st.integers(0, 20), st.integers(1, 30))
def test_shift_then_values_equals_offset_values(ents, s, start):
    x = FiniteSupport(ents)
    np.testing.assert_array_equal(x.shifted(s).values(start, 25), x.values(start + s, 25))


@given(entries, st.integers(0, 20), st.integers(0, 20))
def test_window_and_tail_split_the_shifted_sequence(ents, k, n):
    x = FiniteSupport(ents)
    total = Window(x, k, n).values(1, 80) + Tail(x, k, n).values(1, 80)
    np.testing.assert_array_equal(total, x.shifted(k).values(1, 80))


def test_indexing_starts_at_one():
    with pytest.raises(IndexError):
        Constant(1.0)[0]


def test_x_minus_x_is_zero():
    x = Geometric(1.0, 0.5)
    assert isinstance(x - x, Zero)


def test_combination_merges_and_collapses():
    x = Constant(2.0)
    assert Combination.of((1.0, x)) is x
    c = Combination.of((1.0, x), (2.0, basis(3)))
    assert c[3] == 4.0 and c[4] == 2.0


def test_geometric_values_and_power_sum():
    g = Geometric(3.0, 0.5)
    assert g[4] == 3.0 * 0.125
    # sum_j |3 * 2**(1-j)| * 2**(1-j) = 3 * sum 4**(1-j) = 4
    assert g.window_power_sum(GeometricMatrix(0.5), 1, 1.0, 1, None) == pytest.approx(4.0, rel=1e-15)


def test_blocks_and_sup_bound():
    b = Blocks([(2, 5, 1.5), (10, 12, -4.0)])
    assert [b[j] for j in (2, 3, 5, 6, 11)] == [0.0, 1.5, 1.5, 0.0, -4.0]
    assert b.sup_bound(1) == 4.0
    assert b.sup_bound(13) == 0.0
    assert b.support_end == 12


def test_block_scaled_rule():
    y = Constant(-1.0)
    nu = BlockScaled(y, [(4, 8, 1.0), (16, 20, 2.0)])
    assert nu[4] == 0.0 and nu[5] == 1.0 and nu[17] == 2.0 and nu[21] == 0.0
    assert nu.block_at(18) == (16, 20, 2.0)
    assert nu.block_at(10) is None


def test_scaled_and_shifted_compose():
    x = Scaled(0.5, Constant(2.0))
    assert Shifted(x, 3)[1] == 1.0


@pytest.mark.parametrize("spec,j,val", [("zero", 5, 0.0), ("constant(2.5)", 9, 2.5),
                                        ("geometric(1,0.5)", 3, 0.25), ("basis(4)", 4, 1.0),
                                        ({"kind": "finite", "entries": [[2, 7]]}, 2, 7.0),
                                        ({"kind": "blocks", "blocks": [[0, 3, 2]]}, 3, 2.0)])
def test_parse_sequence(spec, j, val):
    assert parse_sequence(spec)[j] == val


def test_parse_sequence_unknown():
    with pytest.raises(ValueError):
        parse_sequence("sine(3)")
