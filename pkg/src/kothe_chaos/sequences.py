"""Lazy scalar sequences x = (x_1, x_2, ...) indexed from 1.

Indices are plain Python ints, so shifts like ``10**12`` or ``M + 4**M``
cost nothing until a coordinate is actually evaluated.  Each sequence
knows how to

* evaluate a contiguous run of coordinates (``values``),
* bound ``sup_{j >= start} |x_j|`` (``sup_bound``),
* report where its support ends, when that is finite (``support_end``),
* optionally sum ``|x_j a_{j,k}|**p`` over a window in closed form
  (``window_power_sum``).

The last three are what the seminorm code uses to certify tails.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .matrices import KotheMatrix, geometric_power_sum

__all__ = [
    "SequenceRep",
    "Zero",
    "FiniteSupport",
    "Constant",
    "Geometric",
    "Blocks",
    "Scaled",
    "Combination",
    "Shifted",
    "Window",
    "Tail",
    "BlockScaled",
    "basis",
    "parse_sequence",
]


class SequenceRep:
    kind = "rule"

    def values(self, start: int, count: int) -> np.ndarray:
        """Coordinates x_start, ..., x_{start+count-1} as a float array."""
        raise NotImplementedError

    def __getitem__(self, j: int) -> float:
        if j < 1:
            raise IndexError("sequences are indexed from 1")
        return float(self.values(j, 1)[0])

    def sup_bound(self, start: int) -> float | None:
        return None

    @property
    def support_end(self) -> int | None:
        return None

    def window_power_sum(self, matrix: KotheMatrix, k: int, p: float,
                         a: int, b: int | None) -> float | None:
        return None

    def shifted(self, s: int) -> SequenceRep:
        if s == 0:
            return self
        return Shifted(self, s)

    def describe(self) -> str:
        return type(self).__name__

    # arithmetic builds composite views
    def __add__(self, other):
        return Combination.of((1.0, self), (1.0, other))

    def __sub__(self, other):
        return Combination.of((1.0, self), (-1.0, other))

    def __neg__(self):
        return Scaled(-1.0, self)

    def __mul__(self, c):
        if isinstance(c, SequenceRep):
            return NotImplemented
        return Scaled(float(c), self)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Zero(SequenceRep):
    kind = "finite_support"

    def values(self, start, count):
        return np.zeros(count)

    def sup_bound(self, start):
        return 0.0

    @property
    def support_end(self):
        return 0

    def window_power_sum(self, matrix, k, p, a, b):
        return 0.0

    def shifted(self, s):
        return self

    def describe(self):
        return "zero"


class FiniteSupport(SequenceRep):
    """Finitely many nonzero coordinates given as (index, value) pairs."""

    kind = "finite_support"

    def __init__(self, entries):
        items = {}
        for j, v in (entries.items() if isinstance(entries, dict) else entries):
            j = int(j)
            if j < 1:
                raise ValueError("finite-support indices start at 1")
            if v != 0:
                items[j] = items.get(j, 0.0) + float(v)
        self._idx = sorted(i for i, v in items.items() if v != 0)
        self._val = [items[i] for i in self._idx]

    @classmethod
    def from_array(cls, arr, start: int = 1) -> FiniteSupport:
        return cls((start + i, v) for i, v in enumerate(np.asarray(arr, dtype=float)))

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self._idx, self._val))

    def values(self, start, count):
        out = np.zeros(count)
        lo = bisect.bisect_left(self._idx, start)
        hi = bisect.bisect_left(self._idx, start + count)
        for pos in range(lo, hi):
            out[self._idx[pos] - start] = self._val[pos]
        return out

    def sup_bound(self, start):
        lo = bisect.bisect_left(self._idx, start)
        tail = self._val[lo:]
        return max((abs(v) for v in tail), default=0.0)

    @property
    def support_end(self):
        return self._idx[-1] if self._idx else 0

    def window_power_sum(self, matrix, k, p, a, b):
        lo = bisect.bisect_left(self._idx, a)
        hi = len(self._idx) if b is None else bisect.bisect_right(self._idx, b)
        terms = [abs(self._val[i] * matrix.entry(self._idx[i], k)) for i in range(lo, hi)]
        if p == 0:
            return max(terms, default=0.0)
        return math.fsum(t ** p for t in terms)

    def describe(self):
        return f"finite({len(self._idx)} terms)"


@dataclass(frozen=True, eq=False)
class Constant(SequenceRep):
    """x_j = c."""

    c: float

    def values(self, start, count):
        return np.full(count, float(self.c))

    def sup_bound(self, start):
        return abs(self.c)

    @property
    def support_end(self):
        return 0 if self.c == 0 else None

    def window_power_sum(self, matrix, k, p, a, b):
        if self.c == 0:
            return 0.0
        col = matrix.column_power_sum(k, p, a, b)
        if col is None:
            return None
        return abs(self.c) * col if p == 0 else abs(self.c) ** p * col

    def shifted(self, s):
        return self

    def describe(self):
        return f"constant({self.c!r})"


@dataclass(frozen=True, eq=False)
class Geometric(SequenceRep):
    """x_j = c * r**(j-1)."""

    c: float
    r: float

    def values(self, start, count):
        exps = np.arange(count, dtype=float) + float(start - 1)
        with np.errstate(over="ignore", under="ignore"):
            return self.c * np.power(self.r, exps)

    def __getitem__(self, j):
        try:
            return self.c * self.r ** (j - 1)
        except OverflowError:
            return math.copysign(math.inf, self.c)

    def sup_bound(self, start):
        if abs(self.r) > 1:
            return None
        return abs(self.c) * abs(self.r) ** (start - 1)

    def window_power_sum(self, matrix, k, p, a, b):
        col = matrix.column_geometric(k)
        if col is None:
            return None
        scale, ratio = col
        if p == 0:
            if b is not None and b < a:
                return 0.0
            q = abs(self.r) * ratio
            if q <= 1:
                return abs(self.c) * scale * q ** (a - 1)
            return math.inf if b is None else abs(self.c) * scale * q ** (b - 1)
        q = (abs(self.r) * ratio) ** p
        return (abs(self.c) * scale) ** p * geometric_power_sum(q, a, b)

    def shifted(self, s):
        if s == 0:
            return self
        try:
            return Geometric(self.c * self.r ** s, self.r)
        except OverflowError:
            return Shifted(self, s)

    def describe(self):
        return f"geometric({self.c!r},{self.r!r})"


class Blocks(SequenceRep):
    """Piecewise constant with finite support: value v on (lo, hi]."""

    kind = "rule"

    def __init__(self, blocks):
        bl = sorted((int(lo), int(hi), float(v)) for lo, hi, v in blocks if hi > lo)
        for (_, h1, _), (l2, _, _) in zip(bl, bl[1:]):
            if l2 < h1:
                raise ValueError("blocks overlap")
        self.blocks = tuple(bl)
        self._his = [b[1] for b in bl]

    def values(self, start, count):
        out = np.zeros(count)
        stop = start + count  # exclusive
        pos = bisect.bisect_left(self._his, start)
        for lo, hi, v in self.blocks[pos:]:
            if lo + 1 >= stop:
                break
            a = max(lo + 1, start)
            b = min(hi, stop - 1)
            if a <= b:
                out[a - start:b - start + 1] = v
        return out

    def sup_bound(self, start):
        pos = bisect.bisect_left(self._his, start)
        return max((abs(v) for _, _, v in self.blocks[pos:]), default=0.0)

    @property
    def support_end(self):
        return self.blocks[-1][1] if self.blocks else 0

    def window_power_sum(self, matrix, k, p, a, b):
        total = []
        for lo, hi, v in self.blocks:
            lo_, hi_ = max(lo + 1, a), hi if b is None else min(hi, b)
            if lo_ > hi_ or v == 0:
                continue
            col = matrix.column_power_sum(k, p, lo_, hi_)
            if col is None:
                return None
            total.append(abs(v) * col if p == 0 else abs(v) ** p * col)
        if p == 0:
            return max(total, default=0.0)
        return math.fsum(total)

    def describe(self):
        return f"blocks({len(self.blocks)})"


@dataclass(frozen=True, eq=False)
class Scaled(SequenceRep):
    kind = "composite"
    c: float
    base: SequenceRep

    def values(self, start, count):
        return self.c * self.base.values(start, count)

    def sup_bound(self, start):
        b = self.base.sup_bound(start)
        return None if b is None else abs(self.c) * b

    @property
    def support_end(self):
        return 0 if self.c == 0 else self.base.support_end

    def window_power_sum(self, matrix, k, p, a, b):
        s = self.base.window_power_sum(matrix, k, p, a, b)
        if s is None:
            return None
        return abs(self.c) * s if p == 0 else abs(self.c) ** p * s

    def shifted(self, s):
        return Scaled(self.c, self.base.shifted(s)) if s else self

    def describe(self):
        return f"{self.c!r}*{self.base.describe()}"


class Combination(SequenceRep):
    """sum_i c_i x^(i), coordinatewise."""

    kind = "composite"

    def __init__(self, terms):
        self.terms = tuple((float(c), s) for c, s in terms)

    @classmethod
    def of(cls, *terms):
        merged: dict[int, list] = {}
        for c, s in terms:
            while isinstance(s, Scaled):
                c, s = c * s.c, s.base
            parts = [(c * c2, s2) for c2, s2 in s.terms] if isinstance(s, Combination) else [(c, s)]
            for c2, s2 in parts:
                if isinstance(s2, Zero):
                    continue
                slot = merged.setdefault(id(s2), [0.0, s2])
                slot[0] += c2
        flat = [(c, s) for c, s in merged.values() if c != 0]
        if not flat:
            return Zero()
        if len(flat) == 1 and flat[0][0] == 1.0:
            return flat[0][1]
        return cls(flat)

    def values(self, start, count):
        out = np.zeros(count)
        for c, s in self.terms:
            out += c * s.values(start, count)
        return out

    def sup_bound(self, start):
        total = 0.0
        for c, s in self.terms:
            b = s.sup_bound(start)
            if b is None:
                return None
            total += abs(c) * b
        return total

    @property
    def support_end(self):
        ends = [s.support_end for _, s in self.terms]
        if any(e is None for e in ends):
            return None
        return max(ends, default=0)

    def shifted(self, s):
        if s == 0:
            return self
        return Combination((c, t.shifted(s)) for c, t in self.terms)

    def describe(self):
        return " + ".join(f"{c!r}*{s.describe()}" for c, s in self.terms)


@dataclass(frozen=True, eq=False)
class Shifted(SequenceRep):
    """B^offset x: coordinate j is x_{j+offset}."""

    kind = "composite"
    base: SequenceRep
    offset: int

    def values(self, start, count):
        return self.base.values(start + self.offset, count)

    def sup_bound(self, start):
        return self.base.sup_bound(start + self.offset)

    @property
    def support_end(self):
        e = self.base.support_end
        return None if e is None else max(0, e - self.offset)

    def shifted(self, s):
        return Shifted(self.base, self.offset + s) if s else self

    def describe(self):
        return f"B^{self.offset}({self.base.describe()})"


@dataclass(frozen=True, eq=False)
class Window(SequenceRep):
    """x(k, n) = (x_{k+1}, ..., x_{k+n}, 0, 0, ...)."""

    kind = "composite"
    base: SequenceRep
    k: int
    n: int

    def values(self, start, count):
        out = np.zeros(count)
        m = min(count, self.n - start + 1)
        if m > 0:
            out[:m] = self.base.values(start + self.k, m)
        return out

    def sup_bound(self, start):
        if start > self.n:
            return 0.0
        return self.base.sup_bound(start + self.k)

    @property
    def support_end(self):
        e = self.base.support_end
        return self.n if e is None else min(self.n, max(0, e - self.k))

    def window_power_sum(self, matrix, k, p, a, b):
        top = self.n if b is None else min(b, self.n)
        if top < a:
            return 0.0
        inner = self.base.shifted(self.k)
        if isinstance(inner, Shifted):
            return None
        return inner.window_power_sum(matrix, k, p, a, top)

    def describe(self):
        return f"window({self.base.describe()}, {self.k}, {self.n})"


@dataclass(frozen=True, eq=False)
class Tail(SequenceRep):
    """x[k, n] = (0, ..., 0 (n times), x_{k+n+1}, x_{k+n+2}, ...)."""

    kind = "composite"
    base: SequenceRep
    k: int
    n: int

    def values(self, start, count):
        out = np.zeros(count)
        skip = max(0, self.n + 1 - start)
        if skip < count:
            out[skip:] = self.base.values(start + skip + self.k, count - skip)
        return out

    def sup_bound(self, start):
        return self.base.sup_bound(max(start, self.n + 1) + self.k)

    @property
    def support_end(self):
        e = self.base.support_end
        if e is None:
            return None
        e = e - self.k
        return e if e > self.n else 0

    def window_power_sum(self, matrix, k, p, a, b):
        inner = self.base.shifted(self.k)
        if isinstance(inner, Shifted):
            return None
        return inner.window_power_sum(matrix, k, p, max(a, self.n + 1), b)

    def describe(self):
        return f"tail({self.base.describe()}, {self.k}, {self.n})"


class BlockScaled(SequenceRep):
    """coef * |base_j| on each block (lo, hi], zero elsewhere."""

    kind = "composite"

    def __init__(self, base: SequenceRep, blocks):
        self.base = base
        self.blocks = tuple(sorted((int(lo), int(hi), float(c)) for lo, hi, c in blocks if hi > lo))
        self._his = [b[1] for b in self.blocks]

    def block_at(self, j: int):
        pos = bisect.bisect_left(self._his, j)
        if pos < len(self.blocks) and self.blocks[pos][0] < j:
            return self.blocks[pos]
        return None

    def values(self, start, count):
        out = np.zeros(count)
        stop = start + count
        pos = bisect.bisect_left(self._his, start)
        for lo, hi, c in self.blocks[pos:]:
            if lo + 1 >= stop:
                break
            a = max(lo + 1, start)
            b = min(hi, stop - 1)
            if a <= b:
                out[a - start:b - start + 1] = c * np.abs(self.base.values(a, b - a + 1))
        return out

    def sup_bound(self, start):
        best = 0.0
        pos = bisect.bisect_left(self._his, start)
        for lo, _, c in self.blocks[pos:]:
            b = self.base.sup_bound(max(lo + 1, start))
            if b is None:
                return None
            best = max(best, abs(c) * b)
        return best

    @property
    def support_end(self):
        return self.blocks[-1][1] if self.blocks else 0

    def window_power_sum(self, matrix, k, p, a, b):
        parts = []
        for lo, hi, c in self.blocks:
            lo_, hi_ = max(lo + 1, a), hi if b is None else min(hi, b)
            if lo_ > hi_:
                continue
            s = self.base.window_power_sum(matrix, k, p, lo_, hi_)
            if s is None:
                return None
            parts.append(abs(c) * s if p == 0 else abs(c) ** p * s)
        if p == 0:
            return max(parts, default=0.0)
        return math.fsum(parts)

    def describe(self):
        return f"blockscaled({self.base.describe()}, {len(self.blocks)} blocks)"


def basis(i: int, value: float = 1.0) -> FiniteSupport:
    """The unit vector e_i (scaled by ``value``)."""
    return FiniteSupport([(i, value)])


def parse_sequence(spec) -> SequenceRep:
    """Build a sequence from a config entry.

    Strings: ``"zero"``, ``"constant(c)"``, ``"geometric(c,r)"``,
    ``"basis(i)"``.  Objects: ``{"kind": "finite", "entries": [[j, v], ...]}``
    or ``{"kind": "blocks", "blocks": [[lo, hi, v], ...]}``.
    """
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "finite":
            return FiniteSupport([(int(j), float(v)) for j, v in spec["entries"]])
        if kind == "blocks":
            return Blocks([(int(lo), int(hi), float(v)) for lo, hi, v in spec["blocks"]])
        raise ValueError(f"unknown sequence kind {kind!r}")
    text = str(spec).strip()
    head, _, rest = text.partition("(")
    args = [a.strip() for a in rest.rstrip(")").split(",") if a.strip()]
    if head == "zero":
        return Zero()
    if head == "constant":
        return Constant(float(args[0]))
    if head == "geometric":
        return Geometric(float(args[0]), float(args[1]))
    if head == "basis":
        return basis(int(args[0]), float(args[1]) if len(args) > 1 else 1.0)
    raise ValueError(f"unknown sequence rule {spec!r}")
