import numpy as np
import pytest

from kothe_chaos.kothe_space import KotheSpace, seminorm
from kothe_chaos.matrices import ConstantMatrix
from kothe_chaos.sequences import FiniteSupport, Geometric
from kothe_chaos.shift_ops import (
    WeightSequence,
    backward_shift,
    iterate,
    parse_weights,
    tail,
    weighted_backward_shift,
    weighted_to_unweighted,
    window,
)


def test_shift_iterate_window_tail():
    x = Geometric(1.0, 0.5)
    assert backward_shift(x)[1] == x[2]
    assert iterate(x, 5)[1] == x[6]
    w = window(x, 2, 3)
    assert [w[j] for j in (1, 3, 4)] == [x[3], x[5], 0.0]
    t = tail(x, 2, 3)
    assert [t[j] for j in (1, 3, 4)] == [0.0, 0.0, x[6]]
    assert tail(x, 2, 0)[1] == x[3]
    with pytest.raises(ValueError):
        iterate(x, -1)


def test_weight_sequence_cumulative():
    w = WeightSequence(constant=2.0)
    assert [w.cumulative(j) for j in (1, 2, 5)] == [1.0, 2.0, 16.0]
    t = WeightSequence(table=[3.0, 0.5])
    assert t.cumulative(3) == 1.5
    with pytest.raises(IndexError):
        t.weight(5)
    with pytest.raises(ValueError):
        WeightSequence(constant=0.0)


def test_conjugacy_exact_on_finite_support():
    rng = np.random.default_rng(3)
    w = WeightSequence(constant=2.0)
    A2, phi = weighted_to_unweighted(w, ConstantMatrix(1.0))
    for _ in range(10):
        idx = rng.choice(np.arange(1, 60), size=8, replace=False)
        x = FiniteSupport([(int(j), float(v)) for j, v in zip(idx, rng.standard_normal(8))])
        lhs = phi(weighted_backward_shift(x, w)).values(1, 100)
        rhs = backward_shift(phi(x)).values(1, 100)
        np.testing.assert_array_equal(lhs, rhs)
        for k in (1, 2, 3):
            a = seminorm(x, k, KotheSpace(ConstantMatrix(1.0)))
            b = seminorm(FiniteSupport.from_array(phi(x).values(1, 60)), k, KotheSpace(A2))
            assert a == b


def test_reduction_rejects_lost_monotonicity():
    class Decreasing(ConstantMatrix):
        def entry(self, j, k):
            return 1.0 / k

        def block(self, j0, J, K):
            return np.tile(1.0 / np.arange(1, K + 1), (J, 1))

    with pytest.raises(AssertionError):
        weighted_to_unweighted(WeightSequence(constant=2.0), Decreasing())


def test_parse_weights(tmp_path):
    assert parse_weights("constant(3)").weight(7) == 3.0
    (tmp_path / "w.txt").write_text("2\n4\n")
    assert parse_weights("tabulated(w.txt)", tmp_path).cumulative(3) == 8.0
    with pytest.raises(ValueError):
        parse_weights("bogus")
