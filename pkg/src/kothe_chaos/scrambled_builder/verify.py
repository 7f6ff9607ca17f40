"""A posteriori verification of the finished construction.

Every entry is a comparison of two computed, certified numbers at an
explicit index.  Orbit distances over a whole window come from one kernel
pass; only a deterministic sample of them is recorded.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from ..kothe_space import KotheSpace, metric_d, orbit_distance_bounds
from ..sequences import SequenceRep, Window, Zero
from .checks import Check, compare, sample_range, summarize
from .construction import ScrambledFamily, SignBlockLayout
from .schedule import ConstructionSchedule

log = logging.getLogger(__name__)

__all__ = ["ConstructionReport", "verify_construction", "aligned_horizons", "CASE2_RANGES"]

CASE2_RANGES = ("shifted", "literal")


@dataclass
class ConstructionReport:
    mode: str
    sections: dict[str, list[Check]]
    notices: list[str] = field(default_factory=list)
    case2_range: str = "shifted"
    activated: list[dict] = field(default_factory=list)

    def checks(self) -> list[Check]:
        return [c for sec in self.sections.values() for c in sec]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks())

    def summary(self) -> dict:
        return summarize(self.checks())

    def as_dict(self):
        return {"mode": self.mode, "case2_range": self.case2_range,
                "case2_range_text": _case2_text(self.case2_range),
                "activated": self.activated, "notices": self.notices,
                "summary": self.summary(),
                "sections": {k: [c.as_dict() for c in v] for k, v in self.sections.items()},
                "note": "concrete finite checks; no asymptotic claim is made"}


def _case2_text(kind: str) -> str:
    if kind == "shifted":
        return ("i in (M_{kk}, M_{kk+1}], j in [i+1, i+L], L = M_{kk+3} - M_{kk+2}, "
                "kk = k_{P_n^l + 1}")
    return ("i in (M_{kk}, M_{kk+1}], j in [i+1, i+L], L = M_{k_{P_n^l}+3} - M_{k_{P_n^l}+2}, "
            "kk = k_{P_n^l + 1}")


def aligned_horizons(schedule: ConstructionSchedule, layout: SignBlockLayout | None = None,
                     cap: int | None = None) -> dict:
    """Horizons at which the finite-horizon densities are meaningful.

    Proximality: M_{k_{2n-1}} + h(M_{k_{2n-1}}), the end of a stretch on
    which every member pair is close.  Separation: the right ends of the
    layout windows, where a long run of separated iterates has just ended.
    """
    cap = schedule.index_cap if cap is None else cap
    prox = []
    for n in range(1, (len(schedule.k_seq) + 1) // 2 + 1):
        Mp = schedule.Mk(schedule.kn(2 * n - 1))
        end = Mp + schedule.h(Mp)
        if end <= cap:
            prox.append(int(end))
    sep = sorted({b.top for b in layout.blocks}) if layout is not None else []
    sep = [s for s in sep if s <= cap]
    return {"proximality": prox, "separation": sep, "all": sorted(set(prox) | set(sep))}


def _orbit(x: SequenceRep, y: SequenceRep, start: int, count: int, space: KotheSpace):
    """(lo, hi) for d(B^i x, B^i y), i = start .. start+count-1."""
    if count <= 0:
        return np.zeros(0), np.zeros(0)
    return orbit_distance_bounds(x.shifted(start), y.shifted(start), count, space)


def _pair_key(g):
    return [float(g[0]), int(g[1])]


def verify_construction(family: ScrambledFamily, schedule: ConstructionSchedule,
                        layout: SignBlockLayout, y: SequenceRep, space: KotheSpace, *,
                        pairs=None, samples: int = 64,
                        case2_range: str = "shifted") -> ConstructionReport:
    """Check proximality windows, Case 1 and Case 2 for member pairs.

    ``pairs`` defaults to all distinct generator pairs.  Members are
    (alpha, offset); Case 1 covers equal offsets, Case 2 offsets p < q.
    """
    if case2_range not in CASE2_RANGES:
        raise ValueError(f"case2_range must be one of {CASE2_RANGES}")
    if pairs is None:
        pairs = list(itertools.combinations(family.generators, 2))
    for a, b in pairs:
        if tuple(a) == tuple(b):
            raise ValueError("member pairs must be distinct")
    nu, nb = family.nu, family.nu_bar
    zero = Zero()
    notices: list[str] = []
    sec_a: list[Check] = []
    sec_b: list[Check] = []
    sec_c: list[Check] = []
    sec_inv: list[Check] = []
    activated: list[dict] = []
    log.info("verifying %d member pairs", len(pairs))

    # (a) proximality windows
    nu_end = nu.support_end
    n_prox = (len(schedule.k_seq) + 1) // 2
    nu_orbit: dict[int, tuple[np.ndarray, np.ndarray, int]] = {}
    max_q = max((max(a[1], b[1]) for a, b in pairs), default=0)
    for n in range(1, n_prox + 1):
        Mp = schedule.Mk(schedule.kn(2 * n - 1))
        h = schedule.h(Mp)
        lo, hi = _orbit(zero, nu, Mp + 1, h + max_q, space)
        nu_orbit[n] = (lo, hi, Mp)
        if nu_end is not None and Mp + h > nu_end and 2 * n + 1 > len(schedule.k_seq):
            notices.append(f"proximality n={n}: nu is materialized up to {nu_end} only")
    for a, b in pairs:
        if a[1] > b[1]:
            a, b = b, a
        p, q = a[1], b[1]
        xa, xb = family.member(a), family.member(b)
        for n in range(1, n_prox + 1):
            nlo, nhi, Mp = nu_orbit[n]
            h = schedule.h(Mp)
            count = h - q
            if count <= 0:
                notices.append(f"proximality n={n}: window shorter than offset {q}")
                continue
            dlo, dhi = _orbit(xa, xb, Mp + 1, count, space)
            for j in sample_range(Mp, Mp + count, samples):
                r = j - Mp - 1
                bound = (nlo[r + p] + nlo[r + q], nhi[r + p] + nhi[r + q])
                idx = {"a": _pair_key(a), "b": _pair_key(b), "n": n, "j": j}
                sec_a.append(compare("proximality_triangle", idx, (dlo[r], dhi[r]), "<=", bound))
                sec_a.append(compare("proximality_small", idx, bound, "<=", 1.0 / n))

    # (b) Case 1: equal offsets, alpha != beta
    alpha_pairs = sorted({tuple(sorted((a[0], b[0]))) for a, b in pairs if a[1] == b[1]})
    y_orbit = {}
    for n in range(1, len(layout.primes) + 1):
        idx_k = layout.primes[n - 1] + 1
        if idx_k > len(schedule.k_seq):
            notices.append(f"Case 1 n={n}: k_{idx_k} not selected")
            continue
        kk = schedule.kn(idx_k)
        blk = layout.get(n, 1)
        if blk is None or kk + 1 > schedule.depth:
            notices.append(f"Case 1 n={n}: window (M_{kk}, M_{kk + 1}] not in the layout")
            continue
        lo_w, hi_w = schedule.Mk(kk), schedule.Mk(kk + 1)
        ylo, yhi = _orbit(zero, y, lo_w + 1, hi_w - lo_w, space)
        y_orbit[n] = (ylo, yhi)
        for al, be in alpha_pairs:
            if not abs(al - be) * kk / 4 > 1:
                continue
            activated.append({"alpha": al, "beta": be, "n": n, "k": kk})
            dlo, dhi = _orbit(family.scaled(al), family.scaled(be), lo_w + 1, hi_w - lo_w, space)
            for j in sample_range(lo_w, hi_w, samples):
                r = j - lo_w - 1
                idx = {"alpha": al, "beta": be, "n": n, "k": kk, "j": j}
                sec_b.append(compare("case1_separation", idx, (dlo[r], dhi[r]), ">=",
                                     (ylo[r] - 1.0 / kk, yhi[r] - 1.0 / kk)))
    if not activated:
        notices.append("Case 1: no (alpha, beta, n) with |alpha-beta| k/4 > 1 in the materialized layout")

    # (c) Case 2: offsets p < q
    seen_c2 = set()
    missing_c2: dict[tuple[int, int], list] = {}
    for a, b in pairs:
        if a[1] == b[1]:
            continue
        if a[1] > b[1]:
            a, b = b, a
        (al, p), (be, q) = a, b
        l = q - p
        key = (al, be, l)
        if key in seen_c2:
            continue
        seen_c2.add(key)
        for n in range(1, len(layout.primes) + 1):
            blk = layout.get(n, l)
            if blk is None:
                missing_c2.setdefault((n, l), []).append([al, be])
                continue
            kk = blk.k_value
            if kk + 1 > schedule.depth:
                continue
            if case2_range == "shifted":
                L = schedule.Mk(kk + 3) - schedule.Mk(kk + 2)
            else:
                kl = schedule.kn(blk.k_index - 1)
                L = schedule.Mk(kl + 3) - schedule.Mk(kl + 2)
            i_lo, i_hi = schedule.Mk(kk), schedule.Mk(kk + 1)
            sa, sb = family.scaled(al), family.scaled(be)
            seg = sa.values(i_lo + 2, i_hi - i_lo + L)
            segb = sb.values(i_lo + 2 + l, i_hi - i_lo + L)
            gapv = np.abs(seg - segb) - np.abs(seg)  # indexed by j - (i_lo + 2)
            dlo, dhi = _orbit(sa, sb.shifted(l), i_lo + 1, i_hi - i_lo, space)
            for i in sample_range(i_lo, i_hi, samples):
                r = i - i_lo - 1
                worst = float(gapv[r:r + L].min())
                idx = {"alpha": al, "beta": be, "p": p, "q": q, "n": n, "l": l, "i": i,
                       "j_range": [i + 1, i + L], "activated": bool(al * kk / 4 > 1)}
                sec_c.append(compare("case2_sign_opposition", idx, worst, ">=", 0.0))
                rhs = metric_d(zero, Window(sa, i, L), space)
                sec_c.append(compare("case2_separation", idx, (dlo[r], dhi[r]), ">=", rhs))

    for (n, l), who in sorted(missing_c2.items()):
        notices.append(f"Case 2 unverifiable for this offset pair at (n={n}, l={l}): the layout has "
                       f"no such block ({len(who)} alpha pairs affected)")

    # invariants: shift closure and the nu / nu_bar / y domination chain
    for g in family.generators:
        m, m1 = family.member(g).shifted(1), family.member(family.shift(g))
        for start in sample_range(0, max(1, (nu_end or 1)), 8):
            diff = float(np.abs(m.values(start, 64) - m1.values(start, 64)).max())
            sec_inv.append(compare("shift_closure", {"member": _pair_key(g), "start": start},
                                   diff, "<=", 0.0))
    for lo_b, hi_b, coef in getattr(nu, "blocks", []):
        js = sample_range(lo_b, hi_b, samples)
        vb = np.array([abs(nb[j]) for j in js])
        vn = np.array([abs(nu[j]) for j in js])
        vy = np.array([coef * abs(y[j]) for j in js])
        sec_inv.append(compare("domination_chain", {"block": [lo_b, hi_b], "k": coef},
                               float(max((vb - vn).max(), (vn - vy).max())), "<=", 0.0))

    return ConstructionReport(schedule.mode,
                              {"proximality": sec_a, "case1": sec_b, "case2": sec_c,
                               "invariants": sec_inv},
                              notices, case2_range, activated)
