"""Köthe matrices A = (a_{j,k}) given as rules.

Every matrix answers point queries ``entry(j, k)`` and dense block queries
``block(j0, J, K)``.  Generators with a closed form also provide column
tail sums, exact window sums and a global bound for the continuity ratio;
those are what make seminorm tails certifiable.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "KotheMatrix",
    "ConstantMatrix",
    "GeometricMatrix",
    "PowerMatrix",
    "TabulatedMatrix",
    "RowScaledMatrix",
    "MatrixEvaluationError",
    "geometric_power_sum",
    "parse_matrix",
]


class MatrixEvaluationError(ValueError):
    """A matrix rule could not be evaluated at the requested position."""


def geometric_power_sum(q: float, a: int, b: int | None) -> float:
    """Return sum_{j=a}^{b} q**(j-1) for q >= 0; ``b=None`` means infinity."""
    if b is not None and b < a:
        return 0.0
    if q == 0.0:
        return 1.0 if a == 1 else 0.0
    if q == 1.0:
        return math.inf if b is None else float(b - a + 1)
    if q > 1.0:
        if b is None:
            return math.inf
        try:
            return (q ** b - q ** (a - 1)) / (q - 1.0)
        except OverflowError:
            return math.inf
    head = q ** (a - 1)
    if b is None:
        return head / (1.0 - q)
    return head * (1.0 - q ** (b - a + 1)) / (1.0 - q)


class KotheMatrix:
    """Base class for Köthe matrix rules.

    Subclasses override :meth:`entry` and, when they have a closed form,
    the certificate hooks.  The hooks return ``None`` when nothing can be
    certified.
    """

    kind = "generator"
    name = "matrix"

    def entry(self, j: int, k: int) -> float:
        raise NotImplementedError

    def block(self, j0: int, J: int, K: int) -> np.ndarray:
        """Entries a_{j,k} for j in [j0, j0+J) and k in 1..K, shape (J, K)."""
        out = np.empty((J, K))
        for r in range(J):
            for c in range(K):
                out[r, c] = self.entry(j0 + r, c + 1)
        return out

    def column_tail(self, k: int, J: int, p: float) -> float | None:
        """Bound on sum_{j>J} a_{j,k}**p, or sup_{j>J} a_{j,k} when p == 0."""
        return None

    def column_power_sum(self, k: int, p: float, a: int, b: int | None) -> float | None:
        """Exact sum_{j=a}^{b} a_{j,k}**p (sup for p == 0), if known."""
        return None

    def column_geometric(self, k: int) -> tuple[float, float] | None:
        """(scale, ratio) with a_{j,k} = scale * ratio**(j-1), if the column is geometric."""
        return None

    def continuity_bound(self, n: int) -> tuple[int, float] | None:
        """A closed-form (m, bound) with sup_j a_{j,n}/a_{j+1,m} <= bound."""
        return None

    def describe(self) -> str:
        return self.name


@dataclass(frozen=True)
class ConstantMatrix(KotheMatrix):
    """a_{j,k} = c for all j, k."""

    c: float = 1.0

    @property
    def name(self) -> str:
        return f"constant({self.c!r})"

    def entry(self, j, k):
        return float(self.c)

    def block(self, j0, J, K):
        return np.full((J, K), float(self.c))

    def column_tail(self, k, J, p):
        if self.c == 0:
            return 0.0
        return float(self.c) if p == 0 else math.inf

    def column_power_sum(self, k, p, a, b):
        if b is not None and b < a:
            return 0.0
        if p == 0:
            return float(self.c)
        return self.c ** p * geometric_power_sum(1.0, a, b)

    def column_geometric(self, k):
        return (float(self.c), 1.0)

    def continuity_bound(self, n):
        if self.c > 0:
            return n + 1, 1.0
        return None


@dataclass(frozen=True)
class GeometricMatrix(KotheMatrix):
    """a_{j,k} = r**(j-1), constant in k."""

    r: float = 0.5

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("geometric ratio must be positive")

    @property
    def name(self) -> str:
        return f"geometric({self.r!r})"

    def entry(self, j, k):
        try:
            return self.r ** (j - 1)
        except OverflowError as exc:
            raise MatrixEvaluationError(f"overflow evaluating a_({j},{k})") from exc

    def block(self, j0, J, K):
        exps = np.arange(J, dtype=float) + float(j0 - 1)
        with np.errstate(over="ignore", under="ignore"):
            col = np.power(self.r, exps)
        return np.repeat(col[:, None], K, axis=1)

    def column_tail(self, k, J, p):
        if p == 0:
            return self.r ** J if self.r <= 1 else math.inf
        return geometric_power_sum(self.r ** p, J + 1, None)

    def column_power_sum(self, k, p, a, b):
        if p == 0:
            if b is not None and b < a:
                return 0.0
            if self.r <= 1:
                return self.r ** (a - 1)
            return math.inf if b is None else self.r ** (b - 1)
        return geometric_power_sum(self.r ** p, a, b)

    def column_geometric(self, k):
        return (1.0, float(self.r))

    def continuity_bound(self, n):
        # a_{j,n} / a_{j+1,m} = 1/r for every j
        return n + 1, 1.0 / self.r


@dataclass(frozen=True)
class PowerMatrix(KotheMatrix):
    """a_{j,k} = j**k."""

    @property
    def name(self) -> str:
        return "power"

    def entry(self, j, k):
        try:
            return float(j) ** k
        except OverflowError as exc:
            raise MatrixEvaluationError(f"overflow evaluating a_({j},{k})") from exc

    def block(self, j0, J, K):
        js = np.arange(j0, j0 + J, dtype=float)[:, None]
        with np.errstate(over="ignore"):
            return np.power(js, np.arange(1, K + 1, dtype=float)[None, :])

    def continuity_bound(self, n):
        # j**n / (j+1)**m <= 1 for m >= n
        return n + 1, 1.0


@dataclass(frozen=True)
class TabulatedMatrix(KotheMatrix):
    """A finite grid of entries; rows are j = 1..J, columns k = 1..K."""

    values: tuple[tuple[float, ...], ...]
    source: str = "inline"
    kind = "tabulated"

    @classmethod
    def from_csv(cls, path: str | Path) -> TabulatedMatrix:
        with open(path, newline="") as fh:
            rows = [tuple(float(v) for v in row) for row in csv.reader(fh) if row]
        if not rows:
            raise ValueError(f"{path}: empty matrix table")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError(f"{path}: ragged matrix table")
        return cls(tuple(rows), source=str(path))

    @property
    def name(self) -> str:
        return f"tabulated({self.source})"

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.values), len(self.values[0])

    def entry(self, j, k):
        rows, cols = self.shape
        if not (1 <= j <= rows and 1 <= k <= cols):
            raise MatrixEvaluationError(f"a_({j},{k}) is outside the tabulated {rows}x{cols} window")
        return self.values[j - 1][k - 1]


@dataclass(frozen=True)
class RowScaledMatrix(KotheMatrix):
    """a'_{j,k} = a_{j,k} / v_j for a positive row factor v (see shift_ops)."""

    base: KotheMatrix
    weights: object = field(repr=False)  # WeightSequence, kept loose to avoid an import cycle

    @property
    def name(self) -> str:
        return f"rowscaled({self.base.describe()}, {self.weights!r})"

    def entry(self, j, k):
        a = self.base.entry(j, k)
        v = self.weights.cumulative(j)
        if math.isfinite(v) and v > 0:
            return a / v
        if a == 0:
            return 0.0
        return math.exp(math.log(a) - self.weights.log_cumulative(j))

    def block(self, j0, J, K):
        out = np.asarray(self.base.block(j0, J, K), dtype=float).copy()
        for r in range(J):
            v = self.weights.cumulative(j0 + r)
            if math.isfinite(v) and v > 0:
                out[r] /= v
            else:
                lv = self.weights.log_cumulative(j0 + r)
                with np.errstate(divide="ignore"):
                    out[r] = np.where(out[r] > 0, np.exp(np.log(out[r]) - lv), 0.0)
        return out


def parse_matrix(spec: str, base_dir: str | Path | None = None) -> KotheMatrix:
    """Build a matrix from its config name, e.g. ``"geometric(0.5)"``."""
    text = spec.strip()
    head, _, rest = text.partition("(")
    head = head.strip()
    arg = rest[:-1].strip() if rest.endswith(")") else ""
    if head == "constant":
        return ConstantMatrix(float(arg or 1.0))
    if head == "geometric":
        return GeometricMatrix(float(arg))
    if head == "power":
        return PowerMatrix()
    if head == "tabulated":
        path = Path(arg.strip("'\""))
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return TabulatedMatrix.from_csv(path)
    raise ValueError(f"unknown matrix generator {spec!r}")
