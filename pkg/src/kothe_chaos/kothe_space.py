"""The Köthe sequence space lambda_p(A): seminorms, metric and checks.

Every number that involves an infinite sum comes with a certified bound
on what was left out.  Tails are certified in one of four ways, tried in
order:

1. the sequence has finite support (nothing is left out);
2. the sequence and matrix give a closed-form window sum;
3. ``sup |x_j|`` past the cut times the matrix column tail;
4. a caller-supplied bound in :class:`TailBudget`.

If none applies :class:`UncertifiedTailError` is raised; nothing is ever
truncated silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .matrices import KotheMatrix, MatrixEvaluationError
from .sequences import Combination, SequenceRep

__all__ = [
    "KotheSpace",
    "TailBudget",
    "MetricValue",
    "UncertifiedTailError",
    "Violation",
    "ValidationReport",
    "ContinuityReport",
    "MembershipReport",
    "seminorm",
    "seminorms",
    "metric_d",
    "orbit_distance_bounds",
    "validate_kothe",
    "check_continuity",
    "membership",
]


class UncertifiedTailError(ValueError):
    """No certificate is available for the tail of an infinite sum."""


@dataclass(frozen=True)
class KotheSpace:
    """lambda_p(A) over the reals, with p == 0 meaning the c_0-type space.

    ``tol`` fixes how many seminorms enter the metric: the discarded part
    of sum 2**-n is below ``tol``.
    """

    matrix: KotheMatrix
    p: float = 1.0
    tol: float = 1e-12
    max_terms: int = 1 << 16

    def __post_init__(self):
        if not (self.p == 0 or self.p >= 1):
            raise ValueError("p must be 0 or >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @property
    def n_terms(self) -> int:
        return max(1, math.ceil(math.log2(1.0 / self.tol)))

    @property
    def discarded(self) -> float:
        return 2.0 ** (-self.n_terms)


@dataclass(frozen=True)
class TailBudget:
    """Truncation controls for rule-based sequences without oracles."""

    truncation: int | None = None
    tail_bound: float | None = None


@dataclass(frozen=True)
class MetricValue:
    """A certified metric value: the true distance lies in [value, value + error]."""

    value: float
    truncation_error_bound: float

    @property
    def upper(self) -> float:
        return self.value + self.truncation_error_bound

    def __float__(self):
        return self.value


def _pow(v: float, p: float) -> float:
    return v if p == 0 else v ** p


def _root(v: float, p: float) -> float:
    if p in (0, 1):
        return v
    return v ** (1.0 / p)


def _tail_target(space: KotheSpace) -> float:
    return space.tol / 64.0


def _choose_truncation(w: SequenceRep, space: KotheSpace, ks, sup: float | None):
    """Pick J and per-column tails so that truncating at J is certified.

    Returns ``(J, coltails)`` with ``coltails=None`` meaning "exact up to
    the support end" (J covers all of it).
    """
    end = w.support_end
    A = space.matrix
    p = space.p
    if sup is not None:
        J = 32
        while True:
            if end is not None and J >= end:
                return max(end, 1), None
            tails = [A.column_tail(k, J, p) for k in ks]
            if all(t is not None for t in tails):
                worst = max(_pow(sup, p) * t if sup > 0 else 0.0 for t in tails)
                if worst <= _tail_target(space) or J >= space.max_terms:
                    return J, np.asarray(tails, dtype=float)
                J *= 2
                continue
            break
    if end is not None:
        return max(end, 1), None
    raise UncertifiedTailError(f"no tail certificate for {w.describe()}")


def seminorm(x: SequenceRep, k: int, space: KotheSpace,
             budget: TailBudget | None = None) -> tuple[float, float]:
    """(||x||_k over the evaluated range, certified bound on the rest).

    For p >= 1 the first number is the p-th root of the partial sum and the
    true seminorm lies in [value, (value**p + tail)**(1/p)]; ``tail`` is the
    bound on the discarded p-th-power sum.  For p == 0 the true sup lies in
    [value, max(value, tail)].
    """
    A, p = space.matrix, space.p
    exact = x.window_power_sum(A, k, p, 1, None)
    if exact is not None:
        return _root(exact, p), 0.0
    end = x.support_end
    sup = x.sup_bound(1)
    if budget is not None and budget.truncation is not None:
        J = budget.truncation
        if end is not None and end <= J:
            tail = 0.0
        elif budget.tail_bound is not None:
            tail = float(budget.tail_bound)
        else:
            ct = A.column_tail(k, J, p)
            s = x.sup_bound(J + 1)
            if ct is None or s is None:
                raise UncertifiedTailError(
                    f"uncertified tail for {x.describe()} past index {J}")
            tail = _pow(s, p) * ct if s > 0 else 0.0
    else:
        J, tails = _choose_truncation(x, space, [k], sup)
        if tails is None:
            tail = 0.0
        else:
            s = x.sup_bound(J + 1)
            tail = _pow(s, p) * float(tails[0]) if s > 0 else 0.0
    vals = np.abs(x.values(1, J))
    col = space.matrix.block(1, J, k)[:, k - 1]
    terms = vals * col
    if p == 0:
        return float(terms.max(initial=0.0)), tail
    return _root(math.fsum(terms ** p), p), tail


def _unique_columns(weights: np.ndarray, coltail, coef):
    """Merge identical columns, summing their metric coefficients."""
    key = weights if coltail is None else np.vstack([weights, coltail[None, :]])
    _, first, inverse = np.unique(key, axis=1, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    merged = np.zeros(len(first))
    np.add.at(merged, inverse, coef)
    uw = np.ascontiguousarray(weights[:, first])
    ut = None if coltail is None else np.ascontiguousarray(coltail[first])
    return uw, ut, merged


def orbit_distance_bounds(x: SequenceRep, y: SequenceRep, n: int,
                          space: KotheSpace) -> tuple[np.ndarray, np.ndarray]:
    """Certified bounds lo[i] <= d(B^i x, B^i y) <= hi[i] for i < n.

    One pass over the materialized difference x - y; the heavy loop runs in
    the compiled kernel when available.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    w = Combination.of((1.0, x), (-1.0, y))
    K = space.n_terms
    ks = list(range(1, K + 1))
    p = space.p
    sup = w.sup_bound(1)
    J, coltail = _choose_truncation(w, space, ks, sup)
    length = n + J - 1
    raw = np.abs(w.values(1, length))
    absw = raw if p in (0, 1) else raw ** p
    # suffix sup of |w| from index i+J+1 onward
    far = w.sup_bound(length + 1) if coltail is not None else 0.0
    if far is None:
        raise UncertifiedTailError(f"no sup bound for {w.describe()} past {length}")
    suffix = np.empty(n)
    if n:
        rev = np.maximum.accumulate(raw[::-1])[::-1]
        nxt = np.append(rev[J:], 0.0)[:n] if J < length + 1 else np.zeros(n)
        suffix = np.maximum(nxt, far)
    if coltail is None:
        tailfac = np.zeros(n)
        coltail_arr = np.zeros(K)
    else:
        tailfac = suffix if p in (0, 1) else suffix ** p
        coltail_arr = coltail
    try:
        weights = np.asarray(space.matrix.block(1, J, K), dtype=float)
    except MatrixEvaluationError as exc:
        raise UncertifiedTailError(str(exc)) from exc
    if p not in (0, 1):
        weights = weights ** p
    coef = 0.5 ** np.arange(1, K + 1, dtype=float)
    uw, ut, ucoef = _unique_columns(weights, coltail_arr, coef)
    return kernels.orbit_distances(
        np.ascontiguousarray(absw, dtype=float), uw, ucoef, ut,
        np.ascontiguousarray(tailfac, dtype=float), float(p), space.discarded, int(n))


def seminorms(x: SequenceRep, space: KotheSpace, ks=None):
    """Seminorm values and tails for several k at once."""
    ks = ks or range(1, space.n_terms + 1)
    return [seminorm(x, k, space) for k in ks]


def metric_d(x: SequenceRep, y: SequenceRep, space: KotheSpace) -> MetricValue:
    """d(x, y) = sum_n 2**-n ||x-y||_n / (1 + ||x-y||_n), certified."""
    lo, hi = orbit_distance_bounds(x, y, 1, space)
    v = float(lo[0])
    return MetricValue(v, max(0.0, float(hi[0]) - v))


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    kind: str
    j: int
    k: int
    message: str

    def as_dict(self):
        return {"kind": self.kind, "j": self.j, "k": self.k, "message": self.message}


@dataclass
class ValidationReport:
    j_max: int
    k_max: int
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def as_dict(self):
        return {"j_max": self.j_max, "k_max": self.k_max, "valid": self.valid,
                "scope": "window",
                "violations": [v.as_dict() for v in self.violations]}


def validate_kothe(A: KotheMatrix, j_max: int, k_max: int) -> ValidationReport:
    """Check nonnegativity, monotonicity in k and a positive entry per row."""
    if j_max < 1 or k_max < 1:
        raise ValueError("j_max and k_max must be >= 1")
    report = ValidationReport(j_max, k_max)
    out = report.violations
    for j in range(1, j_max + 1):
        row = []
        for k in range(1, k_max + 1):
            try:
                v = float(A.entry(j, k))
            except (MatrixEvaluationError, OverflowError, ValueError) as exc:
                out.append(Violation("evaluation_error", j, k, f"evaluation error at ({j},{k}): {exc}"))
                v = math.nan
            row.append(v)
            if v < 0:
                out.append(Violation("negative", j, k, f"negative entry at ({j},{k})"))
        for k in range(1, k_max):
            a, b = row[k - 1], row[k]
            if not (math.isnan(a) or math.isnan(b)) and a > b:
                out.append(Violation("non_monotone", j, k,
                                     f"a_({j},{k}) = {a!r} > a_({j},{k + 1}) = {b!r}"))
        if not any(v > 0 for v in row if not math.isnan(v)):
            out.append(Violation("zero_row", j, 0,
                                 f"no positive entry found in window for j={j}"))
    return report


@dataclass
class ContinuityReport:
    n: int
    candidates: list[dict]
    witness_m: int | None
    witness_sup: float | None
    evidence: str
    global_bound: tuple[int, float] | None = None

    @property
    def ok(self) -> bool:
        return self.witness_m is not None

    def as_dict(self):
        return {"n": self.n, "witness_m": self.witness_m, "witness_sup": self.witness_sup,
                "evidence": self.evidence, "global_bound": self.global_bound,
                "candidates": self.candidates}


class NoContinuityWitness(ValueError):
    pass


def check_continuity(A: KotheMatrix, n: int, m_search_max: int, j_max: int) -> ContinuityReport:
    """Search m in (n, m_search_max] with sup_{j<=j_max} a_{j,n}/a_{j+1,m} finite.

    0/0 counts as 1; a positive numerator over a zero denominator rejects m.
    """
    if m_search_max <= n:
        raise ValueError("m_search_max must exceed n")
    candidates = []
    witness = None
    for m in range(n + 1, m_search_max + 1):
        sup = 0.0
        reason = None
        try:
            for j in range(1, j_max + 1):
                num = A.entry(j, n)
                den = A.entry(j + 1, m)
                if den == 0:
                    if num == 0:
                        r = 1.0
                    else:
                        reason = f"a_({j + 1},{m}) = 0 while a_({j},{n}) > 0"
                        break
                else:
                    r = abs(num / den)
                sup = max(sup, r)
        except (MatrixEvaluationError, OverflowError) as exc:
            reason = f"evaluation error: {exc}"
        if reason is None and math.isfinite(sup):
            candidates.append({"m": m, "sup": sup, "accepted": True})
            witness = (m, sup)
            break
        candidates.append({"m": m, "sup": None, "accepted": False, "reason": reason or "unbounded"})
    if witness is None:
        raise NoContinuityWitness(f"no continuity witness in search window for n={n}")
    gb = A.continuity_bound(n)
    evidence = "closed_form" if gb is not None and gb[0] <= witness[0] else "window_only"
    return ContinuityReport(n, candidates, witness[0], witness[1], evidence, gb)


# ---------------------------------------------------------------- membership


@dataclass
class MembershipReport:
    verdict: str  # "member", "not_member", "inconclusive"
    rows: list[dict]
    failures: list[str]

    @property
    def member(self) -> bool:
        return self.verdict == "member"

    def as_dict(self):
        return {"verdict": self.verdict, "scope": "window", "rows": self.rows,
                "failures": self.failures}


def membership(x: SequenceRep, space: KotheSpace, k_max: int,
               budget: TailBudget | None = None, decay_index: int = 1024) -> MembershipReport:
    """Certify ||x||_k < inf for k <= k_max (plus decay evidence when p == 0)."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    rows, failures = [], []
    inconclusive = False
    p = space.p
    for k in range(1, k_max + 1):
        try:
            value, tail = seminorm(x, k, space, budget)
        except UncertifiedTailError as exc:
            rows.append({"k": k, "value": None, "tail": None, "status": "uncertified"})
            failures.append(f"k={k}: {exc}")
            inconclusive = True
            continue
        row = {"k": k, "value": value, "tail": tail}
        if not math.isfinite(value) or not math.isfinite(tail):
            J = 4096
            terms = np.abs(x.values(1, J)) * space.matrix.block(1, J, k)[:, k - 1]
            partial = float(terms.max()) if p == 0 else _root(math.fsum(terms ** p), p)
            row.update(status="diverges", partial_at=J, partial=partial)
            failures.append(f"||x||_{k} diverges (partial sum up to {J} is {partial!r})")
        else:
            row["status"] = "finite"
        if p == 0 and row["status"] == "finite":
            s = x.sup_bound(decay_index)
            ct = space.matrix.column_tail(k, decay_index - 1, 0)
            end = x.support_end
            if end is not None and end < decay_index:
                row["decay"] = 0.0
            elif s is None or ct is None:
                row["decay"] = None
                inconclusive = True
                failures.append(f"k={k}: no decay certificate at index {decay_index}")
            else:
                row["decay"] = s * ct
                if not s * ct < space.tol ** 0.5:
                    inconclusive = True
                    failures.append(f"k={k}: decay evidence {s * ct!r} at index {decay_index}")
        rows.append(row)
    if any(r.get("status") == "diverges" for r in rows):
        verdict = "not_member"
    elif inconclusive:
        verdict = "inconclusive"
    else:
        verdict = "member"
    return MembershipReport(verdict, rows, failures)
