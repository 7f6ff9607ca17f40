"""Finite-horizon distributional functions and pair verdicts.

For a pair (x, y) and threshold t the count Phi^(n)(t) is the number of
i < n with d(B^i x, B^i y) < t.  The liminf / limsup densities are not
computable; ``lower_est`` and ``upper_est`` are the min / max of
Phi^(n)(t) / n over a finite horizon schedule and nothing more.

Metric values carry certified error intervals.  An iterate whose
interval straddles t is counted as *ambiguous*, never as close or far.
Verdicts resolve ambiguity against whichever claim is being tested.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field

import numpy as np

from .kothe_space import KotheSpace, orbit_distance_bounds
from .sequences import SequenceRep, Zero

__all__ = [
    "DEFAULT_HORIZONS",
    "DistributionalProfile",
    "PairVerdict",
    "FamilyReport",
    "phi_n",
    "phi_n_naive",
    "profile",
    "classify_pair",
    "verify_scrambled_family",
    "profile_to_csv",
]

DEFAULT_HORIZONS = tuple(2 ** e for e in range(6, 15, 2))


def _check_ascending(values, what):
    if not values:
        raise ValueError(f"{what} must be nonempty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{what} must be strictly ascending")


def _classify(lo, hi, t):
    close = hi < t
    far = lo >= t
    return close, ~(close | far)


def phi_n(x: SequenceRep, y: SequenceRep, n: int, t: float, space: KotheSpace) -> tuple[int, int]:
    """(certified count of i < n with d(B^i x, B^i y) < t, ambiguous count)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not t > 0:
        raise ValueError("t must be positive")
    lo, hi = orbit_distance_bounds(x, y, n, space)
    close, amb = _classify(lo, hi, t)
    return int(close.sum()), int(amb.sum())


def phi_n_naive(x: SequenceRep, y: SequenceRep, n: int, t: float, space: KotheSpace) -> tuple[int, int]:
    """Reference count that recomputes each distance from scratch."""
    from .kothe_space import seminorm

    count = amb = 0
    K = space.n_terms
    for i in range(n):
        w = x.shifted(i) - y.shifted(i)
        lo = hi = 0.0
        sup = w.sup_bound(1)
        nonzero = sup is None or sup > 0
        for k in range(1, K + 1):
            s, tl = seminorm(w, k, space)
            if space.p == 0:
                s_hi = max(s, tl)
            elif space.p == 1:
                s_hi = s + tl
            else:
                s_hi = (s ** space.p + tl) ** (1.0 / space.p)
            lo += 2.0 ** -k * s / (1 + s)
            hi += 2.0 ** -k * s_hi / (1 + s_hi)
        if nonzero:
            hi += space.discarded
        if hi < t:
            count += 1
        elif not lo >= t:
            amb += 1
    return count, amb


@dataclass
class DistributionalProfile:
    """Phi^(n)(t) over a threshold grid and a horizon schedule.

    ``lower_est`` / ``upper_est`` are finite-horizon surrogates (min / max
    over the horizons of the certified ratio), not the liminf / limsup.
    """

    t_grid: list[float]
    horizons: list[int]
    counts: np.ndarray      # shape (len(horizons), len(t_grid))
    ambiguous: np.ndarray   # same shape

    def ratios(self) -> np.ndarray:
        return self.counts / np.asarray(self.horizons, dtype=float)[:, None]

    def ratios_with_ambiguous(self) -> np.ndarray:
        return (self.counts + self.ambiguous) / np.asarray(self.horizons, dtype=float)[:, None]

    @property
    def lower_est(self) -> np.ndarray:
        return self.ratios().min(axis=0)

    @property
    def upper_est(self) -> np.ndarray:
        return self.ratios().max(axis=0)

    def rows(self):
        r = self.ratios()
        for a, n in enumerate(self.horizons):
            for b, t in enumerate(self.t_grid):
                yield n, t, int(self.counts[a, b]), float(r[a, b]), int(self.ambiguous[a, b])

    def as_dict(self):
        return {"t_grid": list(self.t_grid), "horizons": list(self.horizons),
                "counts": self.counts.tolist(), "ambiguous": self.ambiguous.tolist(),
                "lower_est": self.lower_est.tolist(), "upper_est": self.upper_est.tolist(),
                "note": "finite-horizon surrogate"}


def profile(x: SequenceRep, y: SequenceRep, t_grid, horizons, space: KotheSpace) -> DistributionalProfile:
    """Counts for every (horizon, t) from a single orbit pass."""
    t_grid = [float(t) for t in t_grid]
    horizons = [int(n) for n in horizons]
    _check_ascending(t_grid, "t_grid")
    _check_ascending(horizons, "horizons")
    if t_grid[0] <= 0 or horizons[0] < 1:
        raise ValueError("thresholds must be positive and horizons >= 1")
    lo, hi = orbit_distance_bounds(x, y, horizons[-1], space)
    idx = np.asarray(horizons) - 1
    counts = np.empty((len(horizons), len(t_grid)), dtype=np.int64)
    amb = np.empty_like(counts)
    for b, t in enumerate(t_grid):
        close, a = _classify(lo, hi, t)
        counts[:, b] = np.cumsum(close)[idx]
        amb[:, b] = np.cumsum(a)[idx]
    return DistributionalProfile(t_grid, horizons, counts, amb)


@dataclass
class PairVerdict:
    epsilon: float
    eta: float
    proximality_ok: bool
    separation_ok: bool
    verdict: str  # consistent_with_DC_pair | refuted_at_horizon | inconclusive
    proximality_witness: dict = field(default_factory=dict)
    separation_witness: dict = field(default_factory=dict)
    reason: str = ""

    def as_dict(self):
        return {"epsilon": self.epsilon, "eta": self.eta,
                "proximality_ok": self.proximality_ok, "separation_ok": self.separation_ok,
                "verdict": self.verdict, "proximality_witness": self.proximality_witness,
                "separation_witness": self.separation_witness, "reason": self.reason}


def _verdict_from_profile(prof: DistributionalProfile, epsilon: float, eta: float) -> PairVerdict:
    # proximality: ambiguous iterates are not counted as close
    up = prof.ratios().max(axis=0)
    up_at = [prof.horizons[i] for i in prof.ratios().argmax(axis=0)]
    prox_ok = bool((up >= 1 - eta).all())
    # separation: ambiguous iterates are counted as close
    eps_col = prof.t_grid.index(epsilon)
    low = prof.ratios_with_ambiguous()[:, eps_col]
    sep_ok = bool(low.min() <= eta)
    verdict = "consistent_with_DC_pair" if prox_ok and sep_ok else "inconclusive"
    return PairVerdict(
        epsilon, eta, prox_ok, sep_ok, verdict,
        proximality_witness={"upper_est": up.tolist(), "at_horizon": up_at, "t_grid": prof.t_grid},
        separation_witness={"lower_est": float(low.min()),
                            "at_horizon": prof.horizons[int(low.argmin())]},
    )


def classify_pair(x: SequenceRep, y: SequenceRep, epsilon: float, t_grid, horizons,
                  eta: float, space: KotheSpace, *, identical: bool | None = None) -> PairVerdict:
    """Finite-horizon test of the distributional epsilon-chaos conditions.

    Proximality holds when every t in the grid reaches upper_est >= 1-eta;
    separation when lower_est(epsilon) <= eta.  Refutation is reserved for
    x == y (a chaotic pair needs distinct points).
    """
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    t_grid = sorted(float(t) for t in t_grid)
    if float(epsilon) not in t_grid:
        raise ValueError("epsilon must belong to t_grid")
    if identical is None:
        identical = x is y or isinstance(x - y, Zero)
    if identical:
        return PairVerdict(epsilon, eta, True, False, "refuted_at_horizon",
                           reason="points coincide; a distributionally chaotic pair needs distinct points")
    prof = profile(x, y, t_grid, horizons, space)
    v = _verdict_from_profile(prof, float(epsilon), eta)
    return v


@dataclass
class FamilyReport:
    pairs_checked: int
    verdicts: list[dict]
    counts: dict
    worst_pair: dict | None
    duplicate: bool = False

    def as_dict(self):
        return {"pairs_checked": self.pairs_checked, "counts": self.counts,
                "worst_pair": self.worst_pair, "duplicate_generators": self.duplicate,
                "verdicts": self.verdicts}


def _label(g):
    return list(g) if isinstance(g, (tuple, list)) else g


def verify_scrambled_family(family, pair_budget: int, epsilon: float, t_grid, horizons,
                            eta: float, space: KotheSpace, seed: int = 0) -> FamilyReport:
    """Classify up to ``pair_budget`` distinct member pairs (seeded sample).

    ``family`` provides ``generators`` (hashable labels) and ``member(g)``.
    """
    if pair_budget < 1:
        raise ValueError("pair_budget must be >= 1")
    gens = list(family.generators)
    if not gens:
        raise ValueError("empty family")
    counts = {"consistent_with_DC_pair": 0, "refuted_at_horizon": 0, "inconclusive": 0}
    if len(set(gens)) != len(gens):
        seen, dup = set(), None
        for g in gens:
            if g in seen:
                dup = g
                break
            seen.add(g)
        counts["refuted_at_horizon"] = 1
        rec = {"a": _label(dup), "b": _label(dup), "verdict": "refuted_at_horizon",
               "reason": "duplicate generator"}
        return FamilyReport(1, [rec], counts, rec, duplicate=True)
    all_pairs = [(i, j) for i in range(len(gens)) for j in range(i + 1, len(gens))]
    rng = random.Random(seed)
    chosen = sorted(rng.sample(all_pairs, min(pair_budget, len(all_pairs))))
    verdicts = []
    worst, worst_key = None, None
    for i, j in chosen:
        a, b = gens[i], gens[j]
        v = classify_pair(family.member(a), family.member(b), epsilon, t_grid, horizons,
                          eta, space, identical=False)
        rec = {"a": _label(a), "b": _label(b), **v.as_dict()}
        verdicts.append(rec)
        counts[v.verdict] += 1
        key = (v.verdict == "refuted_at_horizon", v.verdict == "inconclusive",
               v.separation_witness.get("lower_est", 0.0))
        if worst_key is None or key > worst_key:
            worst, worst_key = rec, key
    return FamilyReport(len(chosen), verdicts, counts, worst)


def profile_to_csv(prof: DistributionalProfile) -> str:
    """CSV text with header n,t,count,ratio,ambiguous (17 significant digits)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "t", "count", "ratio", "ambiguous"])
    for n, t, c, r, a in prof.rows():
        w.writerow([n, format(t, ".17g"), c, format(r, ".17g"), a])
    return buf.getvalue()
