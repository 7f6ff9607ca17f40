"""Acceptance criteria 1-8, each at its stated tolerance.

Every test appends one PASS/FAIL line; the lines are printed together in
the terminal summary.  Run ``python tests/test_acceptance.py`` for the
lines alone.
"""

import itertools
import random
import time

import numpy as np

from kothe_chaos.cli import bundled_config_path, load_config, main, run_pipeline
from kothe_chaos.dc_stats import classify_pair, phi_n, phi_n_naive, verify_scrambled_family
from kothe_chaos.kothe_space import KotheSpace, metric_d, orbit_distance_bounds, seminorm
from kothe_chaos.matrices import ConstantMatrix, GeometricMatrix, PowerMatrix
from kothe_chaos.scrambled_builder import aligned_horizons
from kothe_chaos.sequences import Constant, FiniteSupport, Zero
from kothe_chaos.shift_ops import WeightSequence, backward_shift, weighted_backward_shift, weighted_to_unweighted


def _record(log, n, ok, detail):
    log.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def _random_fs(rng, max_index=40, count=6):
    idx = rng.sample(range(1, max_index + 1), rng.randint(0, count))
    return FiniteSupport([(j, rng.uniform(-3, 3)) for j in idx])


def _materialize(seq, length=64):
    return FiniteSupport.from_array(seq.values(1, length))


# ---------------------------------------------------------------- 1


def criterion_1():
    rng = random.Random(20240601)
    sp = KotheSpace(PowerMatrix(), 1.0)
    t0 = time.perf_counter()
    worst_tri, worst_trans = -np.inf, 0.0
    ok = True
    for _ in range(200):
        x, y, z = (_random_fs(rng) for _ in range(3))
        dxy, dyx = metric_d(x, y, sp), metric_d(y, x, sp)
        dxz, dzy = metric_d(x, z, sp), metric_d(z, y, sp)
        ok &= dxy.value == dyx.value and dxy.value >= 0
        ok &= metric_d(x, x, sp).value == 0.0
        slack = 2 * (dxy.truncation_error_bound + dxz.truncation_error_bound + dzy.truncation_error_bound)
        excess = dxy.value - (dxz.value + dzy.value)
        worst_tri = max(worst_tri, excess - slack)
        ok &= excess <= slack
        dt = metric_d(_materialize(x + z), _materialize(y + z), sp)
        worst_trans = max(worst_trans, abs(dt.value - dxy.value))
    ok &= worst_trans <= 1e-12
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10
    return ok, (f"metric axioms on 200 triples; max translation gap {worst_trans:.2e}, "
                f"max triangle excess over slack {worst_tri:.2e}, {elapsed:.2f}s")


def test_criterion_1_metric_axioms(acceptance_log):
    ok, detail = criterion_1()
    _record(acceptance_log, 1, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 2


def criterion_2():
    t0 = time.perf_counter()
    sp = KotheSpace(GeometricMatrix(0.5), 1.0)
    x, y = Zero(), Constant(1.0)
    d = metric_d(x, y, sp)
    ok = abs(d.value - 2 / 3) <= 1e-9
    N = 10 ** 4
    lo, hi = orbit_distance_bounds(x, y, N, sp)
    below_05 = np.cumsum(hi < 0.5)
    below_07 = np.cumsum(hi < 0.7)
    amb = np.cumsum((lo < 0.7) & (hi >= 0.7)) + np.cumsum((lo < 0.5) & (hi >= 0.5))
    ns = np.arange(1, N + 1)
    ok &= bool((below_05 == 0).all() and (below_07 == ns).all() and (amb == 0).all())
    for n in (1, 17, 999, N):  # the public counter agrees with the bulk pass
        ok &= phi_n(x, y, n, 0.5, sp) == (0, 0) and phi_n(x, y, n, 0.7, sp) == (n, 0)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    return ok, (f"d(0,y) = {d.value:.15f} (|err| {abs(d.value - 2 / 3):.1e}); "
                f"Phi(0.5)=0 and Phi(0.7)=n for all n <= {N}; {elapsed:.2f}s")


def test_criterion_2_closed_form_instance(acceptance_log):
    ok, detail = criterion_2()
    _record(acceptance_log, 2, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 3


def criterion_3():
    rng = random.Random(7)
    w = WeightSequence(constant=2.0)
    A = ConstantMatrix(1.0)
    A2, phi = weighted_to_unweighted(w, A)
    ok = True
    for _ in range(50):
        x = _random_fs(rng, max_index=90, count=10)
        lhs = phi(weighted_backward_shift(x, w)).values(1, 100)
        rhs = backward_shift(phi(x)).values(1, 100)
        ok &= bool(np.array_equal(lhs, rhs))
        px = FiniteSupport.from_array(phi(x).values(1, 100))
        for k in (1, 2, 5):
            ok &= seminorm(x, k, KotheSpace(A)) == seminorm(px, k, KotheSpace(A2))
    return ok, "phi B_w = B phi and seminorm isometry exact on 50 sequences (w = 2, A = 1)"


def test_criterion_3_conjugacy(acceptance_log):
    ok, detail = criterion_3()
    _record(acceptance_log, 3, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 4


def criterion_4(pipe):
    s = pipe.schedule
    gaps = [abs(c.lhs - 2.0 ** (2 - s.Mk(k))) for k, c in enumerate(s.tail_checks, start=1)]
    ok = len(gaps) == s.depth > 0 and max(gaps) <= 1e-12
    ok &= all(c.certified for c in s.tail_checks)
    return ok, f"{len(gaps)} certified tails equal 2^(2-M_k); max deviation {max(gaps):.1e}"


def test_criterion_4_tail_certificates(acceptance_log, bundled_run):
    ok, detail = criterion_4(bundled_run[0])
    _record(acceptance_log, 4, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 5


def criterion_5():
    rng = random.Random(11)
    sp = KotheSpace(PowerMatrix(), 1.0)
    ok, total = True, 0
    for _ in range(20):
        x, y = _random_fs(rng, 120, 8), _random_fs(rng, 120, 8)
        n = rng.randint(1, 500)
        t = rng.choice([0.05, 0.2, 0.5, 0.9])
        a, b = phi_n(x, y, n, t, sp), phi_n_naive(x, y, n, t, sp)
        ok &= a == b
        total += n
    return ok, f"incremental and naive Phi^(n) agree on 20 pairs ({total} iterates in all)"


def test_criterion_5_brute_force_equivalence(acceptance_log):
    ok, detail = criterion_5()
    _record(acceptance_log, 5, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 6


def criterion_6():
    t0 = time.perf_counter()
    pipe, code = run_pipeline(load_config(bundled_config_path()))
    elapsed = time.perf_counter() - t0
    s, rep = pipe.schedule, pipe.report["stages"]["construction"]
    sec = rep["sections"]
    parts = {
        "i": all(c.passed for c in s.gap_checks + s.tail_checks) and s.depth >= 14,
        "ii": bool(pipe.layout.blocks) and all(c.passed for c in pipe.layout.checks),
        "iii": any(c.name == "sign_alternation" for c in pipe.checks)
        and all(c.passed for c in pipe.checks if c.name == "sign_alternation"),
        "iv": bool(sec["case1"]) and all(c["pass"] for c in sec["case1"]),
        "v": any(c["name"] == "case2_sign_opposition" for c in sec["case2"])
        and all(c["pass"] for c in sec["case2"] if c["name"] == "case2_sign_opposition"),
    }
    ok = all(parts.values()) and elapsed < 300 and code == 0
    flags = " ".join(f"({k}){'ok' if v else 'FAILED'}" for k, v in parts.items())
    return ok, f"{flags}; {len(sec['case1'])} Case 1 and {len(sec['case2'])} Case 2 checks; {elapsed:.1f}s"


def test_criterion_6_construction_verifier(acceptance_log):
    ok, detail = criterion_6()
    _record(acceptance_log, 6, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 7


def criterion_7(pipe):
    st = pipe.exp.stats
    fam, sp = pipe.family, pipe.exp.space
    t_grid = sorted(st["t_grid"])
    horizons = aligned_horizons(pipe.schedule, pipe.layout)["all"]
    budget = max(10, st.get("pair_budget", 10))
    fr = verify_scrambled_family(fam, budget, 0.4, t_grid, horizons, 0.1, sp, seed=pipe.exp.seed)
    ok = fr.pairs_checked >= 10 and fr.counts["refuted_at_horizon"] == 0
    activated = sorted({(r["alpha"], r["beta"])
                        for r in pipe.report["stages"]["construction"]["activated"]})
    worst_sep, min_upper = 0.0, 1.0
    for (al, be), off in itertools.product(activated, range(fam.max_offset + 1)):
        v = classify_pair(fam.member((al, off)), fam.member((be, off)), 0.4, t_grid, horizons, 0.1, sp)
        ok &= v.separation_ok
        worst_sep = max(worst_sep, v.separation_witness["lower_est"])
        min_upper = min(min_upper, min(v.proximality_witness["upper_est"]))
    return ok, (f"{fr.pairs_checked} pairs, {fr.counts['refuted_at_horizon']} refuted; "
                f"{len(activated) * (fam.max_offset + 1)} Case 1 pairs, worst separated-fraction "
                f"estimate {worst_sep:.4f} vs eta 0.1; min proximality upper_est {min_upper:.3f}")


def test_criterion_7_family_verdicts(acceptance_log, bundled_run):
    ok, detail = criterion_7(bundled_run[0])
    _record(acceptance_log, 7, ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 8


def criterion_8(tmp):
    outs = []
    for name in ("a", "b"):
        code = main(["run", "--out", str(tmp / name), "--seed", "0"])
        outs.append((code, (tmp / name / "report.json").read_bytes()))
    ok = outs[0][1] == outs[1][1]
    return ok, f"two seeded runs: report.json {'byte-identical' if ok else 'differs'} ({len(outs[0][1])} bytes)"


def test_criterion_8_determinism(acceptance_log, tmp_path):
    ok, detail = criterion_8(tmp_path)
    _record(acceptance_log, 8, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    pipe, _ = run_pipeline(load_config(bundled_config_path()))
    with tempfile.TemporaryDirectory() as tmp:
        runs = [criterion_1, criterion_2, criterion_3, lambda: criterion_4(pipe), criterion_5,
                criterion_6, lambda: criterion_7(pipe), lambda: criterion_8(Path(tmp))]
        for n, fn in enumerate(runs, start=1):
            ok, detail = fn()
            print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
