"""Backward shifts and the weighted-to-unweighted reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrices import KotheMatrix, RowScaledMatrix
from .sequences import SequenceRep, Tail, Window

__all__ = [
    "backward_shift",
    "iterate",
    "window",
    "tail",
    "WeightSequence",
    "WeightedShift",
    "DiagonalMap",
    "weighted_backward_shift",
    "weighted_to_unweighted",
    "parse_weights",
]


def backward_shift(x: SequenceRep) -> SequenceRep:
    """B(x_1, x_2, ...) = (x_2, x_3, ...)."""
    return x.shifted(1)


def iterate(x: SequenceRep, k: int) -> SequenceRep:
    """B^k x, i.e. x(k) = (x_{k+1}, x_{k+2}, ...)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return x.shifted(k)


def window(x: SequenceRep, k: int, n: int) -> SequenceRep:
    """x(k, n) = (x_{k+1}, ..., x_{k+n}, 0, 0, ...)."""
    if k < 0 or n < 0:
        raise ValueError("k and n must be nonnegative")
    return Window(x, k, n)


def tail(x: SequenceRep, k: int, n: int) -> SequenceRep:
    """x[k, n] = (0, ..., 0, x_{k+n+1}, x_{k+n+2}, ...) with n leading zeros."""
    if k < 0 or n < 0:
        raise ValueError("k and n must be nonnegative")
    if n == 0:
        return iterate(x, k)
    return Tail(x, k, n)


class WeightSequence:
    """Positive weights w_i (i >= 2) with cumulative products v_j.

    v_1 = 1 and v_j = w_2 * ... * w_j.  ``log_cumulative`` is always
    available; ``cumulative`` returns the linear value, ``inf`` or ``0.0``
    once it leaves the float range.
    """

    def __init__(self, constant: float | None = None, table=None, source: str = "inline"):
        if (constant is None) == (table is None):
            raise ValueError("give either a constant weight or a table")
        self.constant = None if constant is None else float(constant)
        self.source = source
        if self.constant is not None and not self.constant > 0:
            raise ValueError("weights must be strictly positive")
        if table is not None:
            tab = np.asarray(table, dtype=float)
            if (tab <= 0).any():
                raise ValueError("weights must be strictly positive")
            self._table = tab  # w_2, w_3, ...
            self._logcum = np.concatenate([[0.0], np.cumsum(np.log(tab))])
            self._cum = np.concatenate([[1.0], np.cumprod(tab)])

    def __repr__(self):
        if self.constant is not None:
            return f"constant({self.constant!r})"
        return f"tabulated({self.source})"

    def weight(self, i: int) -> float:
        if i < 2:
            raise IndexError("weights are indexed from 2")
        if self.constant is not None:
            return self.constant
        if i - 2 >= len(self._table):
            raise IndexError(f"weight w_{i} is outside the tabulated range")
        return float(self._table[i - 2])

    def cumulative(self, j: int) -> float:
        if j < 1:
            raise IndexError("indices start at 1")
        if self.constant is not None:
            try:
                return self.constant ** (j - 1)
            except OverflowError:
                return math.inf
        if j - 1 >= len(self._cum):
            raise IndexError(f"v_{j} is outside the tabulated range")
        return float(self._cum[j - 1])

    def log_cumulative(self, j: int) -> float:
        if self.constant is not None:
            return (j - 1) * math.log(self.constant)
        if j - 1 >= len(self._logcum):
            raise IndexError(f"v_{j} is outside the tabulated range")
        return float(self._logcum[j - 1])

    def weights(self, start: int, count: int) -> np.ndarray:
        if self.constant is not None:
            return np.full(count, self.constant)
        return np.array([self.weight(i) for i in range(start, start + count)])

    def cumulatives(self, start: int, count: int) -> np.ndarray:
        return np.array([self.cumulative(j) for j in range(start, start + count)])


class WeightedShift(SequenceRep):
    """B_w x = (w_2 x_2, w_3 x_3, ...)."""

    kind = "composite"

    def __init__(self, base: SequenceRep, w: WeightSequence):
        self.base, self.w = base, w

    def values(self, start, count):
        return self.w.weights(start + 1, count) * self.base.values(start + 1, count)

    @property
    def support_end(self):
        e = self.base.support_end
        return None if e is None else max(0, e - 1)

    def describe(self):
        return f"B_w({self.base.describe()})"


class DiagonalMap(SequenceRep):
    """phi(x)_j = v_j x_j."""

    kind = "composite"

    def __init__(self, base: SequenceRep, w: WeightSequence):
        self.base, self.w = base, w

    def values(self, start, count):
        return self.w.cumulatives(start, count) * self.base.values(start, count)

    @property
    def support_end(self):
        return self.base.support_end

    def describe(self):
        return f"phi({self.base.describe()})"


def weighted_backward_shift(x: SequenceRep, w: WeightSequence) -> SequenceRep:
    return WeightedShift(x, w)


@dataclass(frozen=True)
class Reduction:
    """Result of conjugating B_w on lambda_p(A) to B on lambda_p(A')."""

    matrix: KotheMatrix
    weights: WeightSequence

    def phi(self, x: SequenceRep) -> SequenceRep:
        return DiagonalMap(x, self.weights)


def weighted_to_unweighted(w: WeightSequence, A: KotheMatrix, check_window: tuple[int, int] = (32, 8)):
    """Return (A', phi) with a'_{j,k} = a_{j,k}/v_j and phi(x)_j = v_j x_j.

    Then phi B_w = B phi and ||x||_k in lambda_p(A) equals ||phi x||_k in
    lambda_p(A').  Column monotonicity of A' is re-checked on
    ``check_window`` since v_j does not depend on k.
    """
    A2 = RowScaledMatrix(A, w)
    j_max, k_max = check_window
    for j in range(1, j_max + 1):
        row = [A2.entry(j, k) for k in range(1, k_max + 1)]
        if any(a > b for a, b in zip(row, row[1:])):
            raise AssertionError(f"reduced matrix lost column monotonicity at row {j}")
    red = Reduction(A2, w)
    return A2, red.phi


def parse_weights(spec: str, base_dir=None) -> WeightSequence:
    """``"constant(c)"`` or ``"tabulated(path)"`` (one weight per line, w_2 first)."""
    head, _, rest = spec.strip().partition("(")
    arg = rest.rstrip(")").strip().strip("'\"")
    if head == "constant":
        return WeightSequence(constant=float(arg))
    if head == "tabulated":
        from pathlib import Path
        path = Path(arg)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        vals = [float(line.split(",")[0]) for line in path.read_text().splitlines() if line.strip()]
        return WeightSequence(table=vals, source=str(path))
    raise ValueError(f"unknown weight sequence {spec!r}")
