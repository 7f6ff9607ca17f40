"""The amplified witness nu, the prime-power sign layout, nu-bar and the
invariant family generated from it."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from ..kothe_space import KotheSpace, seminorm
from ..sequences import BlockScaled, Scaled, SequenceRep, Tail
from .checks import Check, compare
from .schedule import ConstructionSchedule, ScheduleError

__all__ = [
    "odd_primes",
    "build_nu",
    "nu_membership_bound",
    "nu_membership",
    "SignBlock",
    "SignBlockLayout",
    "build_sign_layout",
    "NuBar",
    "build_nu_bar",
    "ScrambledFamily",
    "emit_family",
    "DEFAULT_ALPHAS",
]

DEFAULT_ALPHAS = (0.2, 0.35, 0.5, 0.65, 0.8, 0.95)


def odd_primes(count: int) -> list[int]:
    """The first ``count`` odd primes 3, 5, 7, ... by trial division."""
    out: list[int] = []
    c = 3
    while len(out) < count:
        if all(c % q for q in out if q * q <= c):
            out.append(c)
        c += 2
    return out


# ------------------------------------------------------------------- nu


def build_nu(y: SequenceRep, schedule: ConstructionSchedule, blocks: int | None = None) -> BlockScaled:
    """nu_j = k |y_j| for M_{4k} < j <= M_{4k+3}, zero elsewhere."""
    avail = (schedule.depth - 3) // 4
    if blocks is None:
        blocks = avail
    if blocks < 1 or blocks > avail:
        raise ScheduleError(f"schedule depth {schedule.depth} supports {avail} nu-blocks, "
                            f"{blocks} requested")
    spans = [(schedule.Mk(4 * k), schedule.Mk(4 * k + 3), float(k)) for k in range(1, blocks + 1)]
    return BlockScaled(y, spans)


def nu_membership_bound(tails, k: int, p: float) -> float:
    """sum_{l>=k} l**p * tails[l] (max of l * tails[l] when p == 0).

    ``tails[l-1]`` bounds sum_{j>=M_l} |y_j a_{j,l}|**p.
    """
    terms = [l ** p * t if p else l * t for l, t in enumerate(tails, start=1) if l >= k]
    if p == 0:
        return max(terms, default=0.0)
    return math.fsum(terms)


def nu_membership(nu: SequenceRep, schedule: ConstructionSchedule, space: KotheSpace,
                  k_max: int | None = None) -> list[Check]:
    """Compare sum_{j>=M_k}|nu_j a_{j,k}|^p with the tail-check bound, per k."""
    tails = [c.lhs_upper for c in schedule.tail_checks]
    out = []
    for k in range(1, (k_max or schedule.depth) + 1):
        if k > schedule.depth:
            break
        v, t = seminorm(Tail(nu, 0, schedule.Mk(k) - 1), k, space)
        lhs = (v, max(v, t)) if space.p == 0 else (v ** space.p, v ** space.p + t)
        bound = nu_membership_bound(tails, k, space.p)
        out.append(compare("nu_membership", {"k": k, "M": schedule.Mk(k)}, lhs, "<=", bound))
    return out


# ------------------------------------------------------------------- layout


@dataclass(frozen=True)
class SignBlock:
    """The (n, l) window (base, top] split into length-l chunks.

    Chunk c covers (base + c*l, base + (c+1)*l].  Even chunks with
    c <= floor((top-base)/l) - 1 form the positive set, everything else in
    the window (odd chunks and a trailing partial chunk) the negative set.
    """

    n: int
    l: int
    prime: int
    k_index: int   # P_n**l + 1
    k_value: int   # k_{P_n**l + 1}
    base: int
    top: int

    @property
    def chunks(self) -> int:
        return (self.top - self.base) // self.l

    def sign(self, j: int) -> int:
        if not self.base < j <= self.top:
            return 0
        c = (j - self.base - 1) // self.l
        return 1 if (c % 2 == 0 and c <= self.chunks - 1) else -1

    def signs(self, start: int, count: int) -> np.ndarray:
        js = np.arange(count, dtype=np.int64)
        off = start - self.base - 1  # j - base - 1 at js == 0
        out = np.zeros(count)
        lo = max(0, -off)
        hi = min(count, self.top - start + 1)
        if lo >= hi:
            return out
        c = (js[lo:hi] + off) // self.l
        pos = (c % 2 == 0) & (c <= self.chunks - 1)
        out[lo:hi] = np.where(pos, 1.0, -1.0)
        return out

    def c0_intervals(self) -> list[tuple[int, int]]:
        return [(self.base + c * self.l, self.base + (c + 1) * self.l)
                for c in range(0, self.chunks, 2)]

    def c1_intervals(self) -> list[tuple[int, int]]:
        out = [(self.base + c * self.l, self.base + (c + 1) * self.l)
               for c in range(1, self.chunks, 2)]
        rem = self.base + self.chunks * self.l
        if rem < self.top:
            if out and out[-1][1] == rem:
                out[-1] = (out[-1][0], self.top)
            else:
                out.append((rem, self.top))
        return out

    def as_dict(self, intervals: bool = True):
        d = {"n": self.n, "l": self.l, "prime": self.prime, "k_index": self.k_index,
             "k_value": self.k_value, "window": [self.base, self.top],
             "chunks": self.chunks}
        if intervals:
            d["C0"] = self.c0_intervals()
            d["C1"] = self.c1_intervals()
        return d


def _partition_ok(block: SignBlock) -> bool:
    ivs = sorted([(a, b, 0) for a, b in block.c0_intervals()] +
                 [(a, b, 1) for a, b in block.c1_intervals()])
    cursor = block.base
    for a, b, _ in ivs:
        if a != cursor or b <= a:
            return False
        cursor = b
    return cursor == block.top


@dataclass
class SignBlockLayout:
    primes: list[int]
    blocks: list[SignBlock]
    notices: list[str] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)

    def __post_init__(self):
        self._blocks = sorted(self.blocks, key=lambda b: b.base)
        self._tops = [b.top for b in self._blocks]

    def get(self, n: int, l: int) -> SignBlock | None:
        for b in self.blocks:
            if b.n == n and b.l == l:
                return b
        return None

    def block_at(self, j: int) -> SignBlock | None:
        pos = bisect.bisect_left(self._tops, j)
        if pos < len(self._blocks) and self._blocks[pos].base < j:
            return self._blocks[pos]
        return None

    def covering(self, start: int, stop: int):
        """Blocks meeting the index range [start, stop)."""
        pos = bisect.bisect_left(self._tops, start)
        for b in self._blocks[pos:]:
            if b.base + 1 >= stop:
                break
            yield b

    def as_dict(self, intervals: bool = True):
        return {"primes": self.primes, "blocks": [b.as_dict(intervals) for b in self.blocks],
                "notices": self.notices, "checks": [c.as_dict() for c in self.checks]}


def build_sign_layout(schedule: ConstructionSchedule, n_max: int, l_max: int,
                      index_cap: int | None = None) -> SignBlockLayout:
    """Materialize the (n, l) windows (M_{k_{P_n^l+1}}, M_{k_{P_n^l+1}+3}]."""
    cap = schedule.index_cap if index_cap is None else index_cap
    primes = odd_primes(n_max)
    blocks, notices = [], []
    for n, P in enumerate(primes, start=1):
        for l in range(1, l_max + 1):
            idx = P ** l + 1
            if idx > len(schedule.k_seq):
                notices.append(f"(n={n}, l={l}) skipped: k_{idx} not in the k-subsequence "
                               f"(length {len(schedule.k_seq)})")
                continue
            kv = schedule.kn(idx)
            if kv + 3 > schedule.depth:
                notices.append(f"(n={n}, l={l}) skipped: M_{kv + 3} not materialized "
                               f"(depth {schedule.depth})")
                continue
            base, top = schedule.Mk(kv), schedule.Mk(kv + 3)
            if top > cap:
                notices.append(f"(n={n}, l={l}) skipped: window end {top} exceeds cap {cap}")
                continue
            blocks.append(SignBlock(n, l, P, idx, kv, base, top))
    layout = SignBlockLayout(primes, blocks, notices)
    for b in blocks:
        layout.checks.append(Check("layout_partition", {"n": b.n, "l": b.l}, float(_partition_ok(b)),
                                   float(_partition_ok(b)), "==", 1.0, 1.0,
                                   _partition_ok(b), _partition_ok(b)))
    for i, a in enumerate(blocks):
        for b in blocks[i + 1:]:
            overlap = max(0, min(a.top, b.top) - max(a.base, b.base))
            layout.checks.append(compare("layout_disjoint",
                                         {"a": [a.n, a.l], "b": [b.n, b.l]}, overlap, "<=", 0))
    return layout


# ------------------------------------------------------------------- nu-bar


class NuBar(SequenceRep):
    """+|nu_j| on positive chunks, -|nu_j| on negative chunks, 0 off the layout."""

    kind = "rule"

    def __init__(self, nu: SequenceRep, layout: SignBlockLayout):
        self.nu, self.layout = nu, layout

    def values(self, start, count):
        out = np.zeros(count)
        for b in self.layout.covering(start, start + count):
            a = max(start, b.base + 1)
            e = min(start + count - 1, b.top)
            seg = np.abs(self.nu.values(a, e - a + 1))
            out[a - start:e - start + 1] = b.signs(a, e - a + 1) * seg
        return out

    def sup_bound(self, start):
        best = 0.0
        for b in self.layout.blocks:
            if b.top < start:
                continue
            s = self.nu.sup_bound(max(start, b.base + 1))
            if s is None:
                return None
            best = max(best, s)
        return best

    @property
    def support_end(self):
        return max((b.top for b in self.layout.blocks), default=0)

    def describe(self):
        return f"nu_bar({len(self.layout.blocks)} windows)"


def _max_alternation_product(nb: NuBar, b: SignBlock) -> float:
    """max of nu_bar_j * nu_bar_{j+l} over positive-chunk j with j + l in the window."""
    count = b.top - b.base
    vals = nb.values(b.base + 1, count)
    sg = b.signs(b.base + 1, count)
    head = np.nonzero(sg[:count - b.l] > 0)[0]
    if head.size == 0:
        return 0.0
    return float((vals[head] * vals[head + b.l]).max())


def build_nu_bar(nu: SequenceRep, layout: SignBlockLayout, space: KotheSpace | None = None,
                 k_max: int = 8, samples: int = 256) -> tuple[NuBar, list[Check]]:
    """nu-bar plus comparison checks |nu_bar_j| <= |nu_j| (and seminorms, if a space is given)."""
    nb = NuBar(nu, layout)
    checks = []
    for b in layout.blocks:
        js = sorted({b.base + 1 + (r * (b.top - b.base - 1)) // max(1, samples - 1)
                     for r in range(samples)})
        gap = max(abs(nb[j]) - abs(nu[j]) for j in js)
        checks.append(compare("nu_bar_domination", {"n": b.n, "l": b.l}, gap, "<=", 0.0))
        checks.append(compare("sign_alternation", {"n": b.n, "l": b.l},
                              _max_alternation_product(nb, b), "<=", 0.0))
    if space is not None:
        for k in range(1, k_max + 1):
            vb, tb = seminorm(nb, k, space)
            vn, tn = seminorm(nu, k, space)
            checks.append(compare("nu_bar_membership", {"k": k},
                                  (vb, vb + tb), "<=", (vn, vn + tn)))
    return nb, checks


# ------------------------------------------------------------------- family


class ScrambledFamily:
    """Members B^n(alpha * nu_bar) for alpha in ``alphas`` and n <= ``max_offset``.

    Generators are (alpha, n) pairs.  Shifting a member gives the member
    (alpha, n+1), which is representable for every n; that is the
    invariance B(D) subset D.
    """

    def __init__(self, nu: SequenceRep, nu_bar: NuBar, alphas, max_offset: int):
        self.nu, self.nu_bar = nu, nu_bar
        self.alphas = tuple(float(a) for a in alphas)
        self.max_offset = int(max_offset)
        self._scaled = {a: Scaled(a, nu_bar) for a in self.alphas}

    @property
    def generators(self) -> list[tuple[float, int]]:
        return [(a, n) for a in self.alphas for n in range(self.max_offset + 1)]

    def scaled(self, alpha: float) -> SequenceRep:
        if alpha not in self._scaled:
            self._scaled[alpha] = Scaled(alpha, self.nu_bar)
        return self._scaled[alpha]

    def member(self, g: tuple[float, int]) -> SequenceRep:
        alpha, n = g
        return self.scaled(alpha).shifted(n)

    @staticmethod
    def shift(g: tuple[float, int]) -> tuple[float, int]:
        return (g[0], g[1] + 1)

    def as_dict(self):
        return {"alphas": list(self.alphas), "max_offset": self.max_offset,
                "members": [list(g) for g in self.generators]}


def emit_family(nu_bar: NuBar, alphas=DEFAULT_ALPHAS, max_offset: int = 0,
                separation_floor: float = 0.1, nu: SequenceRep | None = None) -> ScrambledFamily:
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ValueError("at least one alpha is required")
    if any(not 0 < a < 1 for a in alphas):
        raise ValueError("alphas must lie in (0, 1)")
    if len(set(alphas)) != len(alphas):
        raise ValueError("alphas must be distinct")
    srt = sorted(alphas)
    for a, b in zip(srt, srt[1:]):
        if b - a < separation_floor:
            raise ValueError(
                f"alphas {a} and {b} are closer than the separation floor {separation_floor}; "
                "equal-offset pairs are only separated on windows where |alpha-beta| * k/4 > 1, "
                "so nearby alphas push that activation out of reach")
    if max_offset < 0:
        raise ValueError("max_offset must be nonnegative")
    return ScrambledFamily(nu if nu is not None else nu_bar.nu, nu_bar, alphas, max_offset)
