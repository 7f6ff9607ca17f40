"""Index schedules: the density horizons N_k, the gapped subsequence M_k
and the parity-structured subsequence k_n.

Faithful mode uses the gap 4**M and proximity window 2**M.  Scaled mode
swaps them for user-chosen linear rules so that every index stays below a
cap and every check can be evaluated.  Either way each selection is
verified a posteriori and recorded; nothing is assumed.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..kothe_space import KotheSpace, UncertifiedTailError, metric_d, orbit_distance_bounds, seminorm
from ..sequences import SequenceRep, Tail, Window, Zero
from .checks import Check, compare, sample_range

log = logging.getLogger(__name__)

__all__ = [
    "GapFunction",
    "ScheduleError",
    "HypothesisNotEvidenced",
    "DensitySchedule",
    "ConstructionSchedule",
    "find_density_schedule",
    "refine_gap_schedule",
    "select_k_subsequence",
    "parse_gap",
]


class ScheduleError(RuntimeError):
    """A schedule requirement cannot be met within the available indices."""

    def __init__(self, message: str, k: int | None = None):
        super().__init__(message)
        self.k = k
        self.partial = None  # schedule built before the failure, if any


class HypothesisNotEvidenced(ScheduleError):
    pass


@dataclass(frozen=True)
class GapFunction:
    """g(M) as an exact integer rule: ``power`` is base**M, ``linear`` floor(a*M + b)."""

    kind: str
    a: float = 1.0
    b: float = 0.0
    base: int = 4

    def __call__(self, M: int) -> int:
        if self.kind == "power":
            return self.base ** M
        if self.kind == "linear":
            return max(1, math.floor(self.a * M + self.b))
        raise ValueError(f"unknown gap kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "power":
            return f"{self.base}^M"
        return f"linear({self.a!r},{self.b!r})"


FAITHFUL_GAP = GapFunction("power", base=4)
FAITHFUL_H = GapFunction("power", base=2)


def parse_gap(spec: str) -> GapFunction:
    """``"linear(a,b)"``, ``"power(base)"`` or the shorthands ``"4^M"``/``"2^M"``."""
    text = spec.replace(" ", "")
    if text in ("4^M", "2^M"):
        return GapFunction("power", base=int(text[0]))
    head, _, rest = text.partition("(")
    args = [a for a in rest.rstrip(")").split(",") if a]
    if head == "linear":
        return GapFunction("linear", float(args[0]), float(args[1]) if len(args) > 1 else 0.0)
    if head == "power":
        return GapFunction("power", base=int(args[0]))
    raise ValueError(f"unknown gap rule {spec!r}")


@dataclass
class DensitySchedule:
    """Horizons N_1 < N_2 < ... at which the separated fraction is high."""

    N: list[int]
    densities: list[float]
    delta: float
    thresholds: list[float]
    horizon_cap: int

    def __post_init__(self):
        if any(not 0.0 <= d <= 1.0 for d in self.densities):
            raise ValueError("densities must lie in [0, 1]")
        if any(b < a for a, b in zip(self.densities, self.densities[1:])):
            raise ValueError("densities must be nondecreasing along the schedule")
        if any(b <= a for a, b in zip(self.N, self.N[1:])):
            raise ValueError("horizons must be strictly increasing")

    def as_dict(self, head: int = 16):
        return {"delta": self.delta, "horizon_cap": self.horizon_cap, "count": len(self.N),
                "N_head": self.N[:head], "densities_head": self.densities[:head],
                "N_last": self.N[-1] if self.N else None,
                "density_last": self.densities[-1] if self.densities else None,
                "note": "finite-horizon evidence"}


def _eta_at(eta_seq, k: int):
    if callable(eta_seq):
        return eta_seq(k)
    return eta_seq[k - 1] if k <= len(eta_seq) else None


def find_density_schedule(x: SequenceRep, y: SequenceRep, delta: float,
                          eta_seq: Sequence[float] | Callable[[int], float],
                          horizon_cap: int, space: KotheSpace,
                          candidates: Sequence[int] | None = None) -> DensitySchedule:
    """Pick N_k with separated fraction >= 1 - eta_k among the candidates.

    The separated fraction at n counts i < n whose distance is certified
    to be >= delta.  A finite ``eta_seq`` yields that many horizons and
    fails if one is missing; a callable continues until the candidates run
    out.  Each N_k must also match the previous density so the recorded
    densities never decrease.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if horizon_cap < 1:
        raise ValueError("horizon_cap must be >= 1")
    lo, _ = orbit_distance_bounds(x, y, horizon_cap, space)
    dens = np.cumsum(lo >= delta) / np.arange(1, horizon_cap + 1)
    if candidates is None:
        candidates = [2 ** e for e in range(1, horizon_cap.bit_length()) if 2 ** e <= horizon_cap]
    cands = [c for c in candidates if 1 <= c <= horizon_cap]
    N, ds, thr = [], [], []
    pos, k, prev = 0, 1, 0.0
    while True:
        eta = _eta_at(eta_seq, k)
        if eta is None:
            break
        need = max(1.0 - eta, prev)
        while pos < len(cands) and dens[cands[pos] - 1] < need:
            pos += 1
        if pos == len(cands):
            if callable(eta_seq) and N:
                break
            best = float(dens.max()) if len(dens) else 0.0
            raise HypothesisNotEvidenced(
                f"hypothesis not evidenced below horizon_cap={horizon_cap}: no N_{k} with "
                f"separated density >= {need:.6g} (best density found {best:.6g})", k)
        n = cands[pos]
        N.append(n)
        ds.append(float(dens[n - 1]))
        thr.append(need)
        prev = ds[-1]
        pos += 1
        k += 1
    return DensitySchedule(N, ds, float(delta), thr, horizon_cap)


@dataclass
class ConstructionSchedule:
    mode: str
    M: list[int]
    gap: GapFunction
    h: GapFunction
    index_cap: int
    gap_checks: list[Check] = field(default_factory=list)
    tail_checks: list[Check] = field(default_factory=list)
    window_checks: list[Check] = field(default_factory=list)
    k_seq: list[int] = field(default_factory=list)
    tail10_checks: list[Check] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)

    def Mk(self, k: int) -> int:
        """M_k with the 1-based index used throughout."""
        return self.M[k - 1]

    def kn(self, n: int) -> int:
        return self.k_seq[n - 1]

    @property
    def depth(self) -> int:
        return len(self.M)

    def tail_value(self, k: int) -> float:
        return self.tail_checks[k - 1].lhs_upper

    def checks(self) -> list[Check]:
        return self.gap_checks + self.tail_checks + self.window_checks + self.tail10_checks

    def check_invariants(self):
        for k in range(1, self.depth):
            if self.M[k] - self.M[k - 1] < self.gap(self.M[k - 1]):
                raise AssertionError(f"gap condition broken between M_{k} and M_{k + 1}")
        ks = self.k_seq
        if ks:
            if ks[0] != 1:
                raise AssertionError("k_1 must be 1")
            for n in range(2, len(ks) + 1):
                if n % 2 == 0 and ks[n - 1] % 4:
                    raise AssertionError(f"k_{n} must be a multiple of 4")
                if n % 2 == 1 and ks[n - 1] != ks[n - 2] + 3:
                    raise AssertionError(f"k_{n} must equal k_{n - 1} + 3")
            if any(b <= a for a, b in zip(ks, ks[1:])):
                raise AssertionError("k-subsequence must increase")

    def as_dict(self):
        return {"mode": self.mode, "M": self.M, "gap": self.gap.describe(),
                "h": self.h.describe(), "index_cap": self.index_cap, "k_seq": self.k_seq,
                "checks": {"gap": [c.as_dict() for c in self.gap_checks],
                           "tail": [c.as_dict() for c in self.tail_checks],
                           "window": [c.as_dict() for c in self.window_checks],
                           "tail10": [c.as_dict() for c in self.tail10_checks]},
                "notices": self.notices}


def _tail_sum(y: SequenceRep, k: int, M: int, space: KotheSpace) -> tuple[float, float, bool]:
    """sum_{j>=M} |y_j a_{j,k}|**p (sup when p == 0) as (value, upper, certified)."""
    try:
        v, t = seminorm(Tail(y, 0, M - 1), k, space)
    except UncertifiedTailError:
        return math.nan, math.nan, False
    if space.p == 0:
        return v, max(v, t), True
    return v ** space.p, v ** space.p + t, True


def _check_49(y, space, k, lo, hi, L, samples) -> list[Check]:
    out = []
    slack = 1.0 / (2 * k)
    for j in sample_range(lo, hi, samples):
        left = metric_d(Zero(), Window(y, j, L), space)
        right = metric_d(Zero(), y.shifted(j), space)
        out.append(compare("window_lower_bound", {"k": k, "j": j, "length": L}, left, ">=",
                           (right.value - slack, right.upper - slack)))
    return out


def refine_gap_schedule(density: DensitySchedule, gap: GapFunction, y: SequenceRep,
                        space: KotheSpace, k_max: int, *, index_cap: int | None = None,
                        h: GapFunction | None = None, mode: str = "scaled",
                        retries: int = 8, samples: int = 64) -> ConstructionSchedule:
    """Select M_1 < ... < M_{k_max} from the density horizons.

    Each M_k is the first horizon clearing the gap from M_{k-1} whose tail
    sum_{j>=M_k}|y_j a_{j,k}|^p is below 2**-k.  The window comparison for
    M_{2k} < j <= M_{2k+1} is checked on a sample once M_{2k+2} is chosen;
    a failure moves M_{2k+2} to the next admissible horizon (at most
    ``retries`` times).
    """
    cap = density.horizon_cap if index_cap is None else min(index_cap, density.horizon_cap)
    sched = ConstructionSchedule(mode, [], gap, h or gap, cap)
    N = [n for n in density.N if n <= cap]
    for k in range(1, k_max + 1):
        if k == 1:
            lower = 1
        else:
            prev = sched.M[-1]
            lower = prev + gap(prev)
        pos = bisect.bisect_left(N, lower)
        if pos == len(N):
            if k == 1 or lower < 10 ** 30:
                need = str(lower)
            else:
                need = (f"M_{k - 1} + g(M_{k - 1}) = {prev} + {gap.describe().replace('M', str(prev))}"
                        f" (about 10^{int(math.log10(gap(prev)))})")
            exc = ScheduleError(f"index cap exceeded at k={k}: M_{k} must be >= {need} "
                                f"but the horizon cap is {cap}", k)
            exc.partial = sched
            raise exc

        def tail_ok(n):
            v, up, cert = _tail_sum(y, k, n, space)
            return cert and up < 2.0 ** -k

        first_v, _, cert = _tail_sum(y, k, N[pos], space)
        if not cert:
            chosen = [pos]
            sched.notices.append(f"k={k}: tail sum uncertified, M_{k} taken at the gap bound")
        else:
            # tails are nonincreasing in M: bisect for the first passing horizon
            a, b = pos, len(N)
            while a < b:
                mid = (a + b) // 2
                if tail_ok(N[mid]):
                    b = mid
                else:
                    a = mid + 1
            if a == len(N):
                exc = ScheduleError(f"tail condition at k={k} not met below the horizon cap {cap}", k)
                exc.partial = sched
                raise exc
            chosen = list(range(a, min(len(N), a + retries + 1)))
        window = []
        pick = chosen[0]
        if k >= 4 and k % 2 == 0:
            kk = k // 2 - 1
            for c in chosen:
                L = N[c] - sched.M[2 * kk]
                window = _check_49(y, space, kk, sched.M[2 * kk - 1], sched.M[2 * kk], L, samples)
                pick = c
                if all(w.passed for w in window):
                    break
                log.info("window check failed for M_%d = %d, trying the next horizon", k, N[c])
        M = N[pick]
        v, up, cert = _tail_sum(y, k, M, space)
        if cert:
            sched.tail_checks.append(compare("tail_sum", {"k": k, "M": M}, (v, up), "<", 2.0 ** -k))
        else:
            sched.tail_checks.append(Check("tail_sum", {"k": k, "M": M, "status": "uncertified"},
                                           math.nan, math.nan, "<", 2.0 ** -k, 2.0 ** -k, False, False))
        sched.window_checks.extend(window)
        if sched.M:
            g = gap(sched.M[-1])
            sched.gap_checks.append(compare("gap", {"k": k - 1}, M - sched.M[-1], ">=", g))
        sched.M.append(M)
    sched.check_invariants()
    return sched


def select_k_subsequence(schedule: ConstructionSchedule, nu: SequenceRep, space: KotheSpace,
                         n_max: int | None = None, retries: int = 8,
                         samples: int = 64) -> ConstructionSchedule:
    """Choose k_1 = 1, k_{2n} in 4N, k_{2n+1} = k_{2n} + 3.

    k_{2n} is the smallest multiple of 4 past k_{2n-1} for which the tail
    of nu beyond M_{k_{2n}} - g(M_{k_{2n-1}}) is small, i.e.
    d(0, nu[j, M_{k_{2n}} - g(M_{k_{2n-1}})]) <= 1/(2n) at sampled
    M_{k_{2n-1}} < j <= M_{k_{2n-1}} + h(M_{k_{2n-1}}).
    """
    K = schedule.depth
    ks = [1]
    checks: list[Check] = []
    n = 1
    while n_max is None or n <= n_max:
        prev = ks[-1]
        Mp = schedule.Mk(prev)
        cand = (prev // 4 + 1) * 4
        accepted = None
        for _ in range(retries + 1):
            if cand > K:
                break
            L = schedule.Mk(cand) - schedule.gap(Mp)
            if L < 0:
                cand += 4
                continue
            recs = []
            for j in sample_range(Mp, Mp + schedule.h(Mp), samples):
                val = metric_d(Zero(), Tail(nu, j, L), space)
                recs.append(compare("nu_tail_smallness", {"n": n, "k_2n": cand, "j": j, "length": L},
                                    val, "<=", 1.0 / (2 * n)))
            if all(r.passed for r in recs):
                accepted = cand
                checks.extend(recs)
                break
            cand += 4
        if accepted is None:
            if n == 1:
                raise ScheduleError(f"no admissible k_2 below schedule depth {K} (n=1)", 1)
            schedule.notices.append(f"k-subsequence stops at n={n}: schedule depth {K} exhausted")
            break
        ks.append(accepted)
        if accepted + 3 > K:
            schedule.notices.append(
                f"k_{2 * n + 1} = {accepted + 3} exceeds schedule depth {K}; subsequence ends")
            break
        ks.append(accepted + 3)
        n += 1
    schedule.k_seq = ks
    schedule.tail10_checks = checks
    schedule.check_invariants()
    return schedule
