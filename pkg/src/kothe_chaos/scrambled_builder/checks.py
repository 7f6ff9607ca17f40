"""Recorded inequality checks and deterministic index sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..kothe_space import MetricValue

__all__ = ["Check", "compare", "sample_range", "summarize"]


def _interval(v):
    if isinstance(v, MetricValue):
        return v.value, v.upper
    if isinstance(v, tuple):
        return float(v[0]), float(v[1])
    return v, v


@dataclass(frozen=True)
class Check:
    """One concrete comparison between two computed numbers.

    ``passed`` means the certified intervals are consistent with the
    relation; ``certified`` means every point of both intervals satisfies it.
    """

    name: str
    indices: dict
    lhs: float
    lhs_upper: float
    relation: str
    rhs: float
    rhs_upper: float
    passed: bool
    certified: bool

    def as_dict(self):
        return {"name": self.name, "indices": self.indices,
                "lhs": _jsonable(self.lhs), "lhs_upper": _jsonable(self.lhs_upper),
                "relation": self.relation,
                "rhs": _jsonable(self.rhs), "rhs_upper": _jsonable(self.rhs_upper),
                "pass": self.passed, "certified": self.certified}


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def compare(name: str, indices: dict, lhs, relation: str, rhs) -> Check:
    l_lo, l_hi = _interval(lhs)
    r_lo, r_hi = _interval(rhs)
    if relation == "<=":
        ok, cert = l_lo <= r_hi, l_hi <= r_lo
    elif relation == "<":
        ok, cert = l_lo < r_hi, l_hi < r_lo
    elif relation == ">=":
        ok, cert = l_hi >= r_lo, l_lo >= r_hi
    elif relation == ">":
        ok, cert = l_hi > r_lo, l_lo > r_hi
    else:
        raise ValueError(f"unknown relation {relation!r}")
    return Check(name, dict(indices), l_lo, l_hi, relation, r_lo, r_hi, bool(ok), bool(cert))


def sample_range(lo: int, hi: int, count: int = 64) -> list[int]:
    """Deterministic sample of the integers in (lo, hi]: endpoints plus stride."""
    if hi <= lo:
        return []
    size = hi - lo
    if size <= count:
        return list(range(lo + 1, hi + 1))
    count = max(count, 2)
    return sorted({lo + 1 + (r * (size - 1)) // (count - 1) for r in range(count)})


@dataclass
class _Tally:
    total: int = 0
    passed: int = 0
    certified: int = 0


def summarize(checks) -> dict:
    by_name: dict[str, _Tally] = {}
    for c in checks:
        t = by_name.setdefault(c.name, _Tally())
        t.total += 1
        t.passed += c.passed
        t.certified += c.certified
    total = sum(t.total for t in by_name.values())
    passed = sum(t.passed for t in by_name.values())
    return {
        "total": total,
        "passed": passed,
        "failed": total - passed,
        "by_name": {k: {"total": v.total, "passed": v.passed, "failed": v.total - v.passed,
                        "certified": v.certified}
                    for k, v in sorted(by_name.items())},
    }
