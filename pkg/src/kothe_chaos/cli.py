"""``kothe-chaos``: run the construction from a JSON experiment config.

Exit codes: 0 when no recorded check failed, 1 when a check failed or the
pipeline stopped early (the report is still written), 2 for unusable input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .dc_stats import DEFAULT_HORIZONS, classify_pair, profile, profile_to_csv, verify_scrambled_family
from .kothe_space import (
    KotheSpace,
    NoContinuityWitness,
    UncertifiedTailError,
    check_continuity,
    membership,
    metric_d,
    validate_kothe,
)
from .matrices import parse_matrix
from .scrambled_builder import (
    FAITHFUL_GAP,
    FAITHFUL_H,
    ScheduleError,
    aligned_horizons,
    build_nu,
    build_nu_bar,
    build_sign_layout,
    emit_family,
    find_density_schedule,
    nu_membership,
    parse_gap,
    refine_gap_schedule,
    select_k_subsequence,
    summarize,
    verify_construction,
)
from .sequences import parse_sequence

log = logging.getLogger("kothe_chaos")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CHECKS, EXIT_INPUT = 0, 1, 2
BUNDLED = "all_ones_geometric.json"


class ConfigError(ValueError):
    """The config cannot be used; the message names the offending field."""


def _schema() -> dict:
    return json.loads(resources.files("kothe_chaos.data").joinpath("config.schema.json").read_text())


def bundled_config_path() -> Path:
    return Path(str(resources.files("kothe_chaos.data").joinpath(BUNDLED)))


@dataclass
class Experiment:
    raw: dict
    base_dir: Path
    space: KotheSpace
    x: object
    y: object
    seed: int

    @property
    def sched(self) -> dict:
        return self.raw["schedule"]

    @property
    def stats(self) -> dict:
        return self.raw["stats"]

    @property
    def fam(self) -> dict:
        return self.raw["family"]


def load_config(path: str | Path, seed: int | None = None) -> Experiment:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        lines = [f"{'.'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in errors]
        raise ConfigError("config does not match the schema:\n  " + "\n  ".join(lines))
    return _interpret(raw, path.parent, seed)


def _interpret(raw: dict, base_dir: Path, seed: int | None) -> Experiment:
    w, sch, st, fam = raw["witness"], raw["schedule"], raw["stats"], raw["family"]
    if not w["delta"] > 0:
        raise ConfigError("witness.delta: delta must be positive")
    if st["epsilon"] not in st["t_grid"]:
        raise ConfigError("stats.epsilon: epsilon must be one of stats.t_grid")
    if not st["epsilon"] < w["delta"]:
        raise ConfigError("stats.epsilon: epsilon must be strictly below witness.delta")
    if sch["mode"] == "scaled":
        for key in ("gap", "h"):
            if key not in sch:
                raise ConfigError(f"schedule.{key}: required in scaled mode")
    for key in ("gap", "h"):
        if key in sch:
            try:
                parse_gap(sch[key])
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"schedule.{key}: {exc}") from exc
    try:
        matrix = parse_matrix(raw["space"]["matrix"], base_dir)
    except (ValueError, OSError) as exc:
        raise ConfigError(f"space.matrix: {exc}") from exc
    seqs = {}
    for key in ("x", "y"):
        try:
            seqs[key] = parse_sequence(w[key])
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ConfigError(f"witness.{key}: {exc}") from exc
    if any(not 0 < a < 1 for a in fam["alphas"]):
        raise ConfigError("family.alphas: every alpha must lie in (0, 1)")
    space = KotheSpace(matrix, float(raw["space"].get("p", 1.0)), float(raw["space"].get("tol", 1e-12)))
    s = raw.get("seed", 0) if seed is None else seed
    return Experiment(raw, base_dir, space, seqs["x"], seqs["y"], int(s))


# ---------------------------------------------------------------- pipeline


class Pipeline:
    """Runs the stages in order and accumulates one report dictionary."""

    def __init__(self, exp: Experiment):
        self.exp = exp
        self.report: dict = {"schema_version": SCHEMA_VERSION, "seed": exp.seed,
                             "config": exp.raw, "stages": {}, "status": "ok", "error": None}
        self.checks = []
        self.extra_failures: list[str] = []
        self.layout = None
        self.profile = None

    def _stage(self, name, value):
        self.report["stages"][name] = value

    def validate(self):
        e = self.exp
        jv, kv = e.raw["space"].get("validate_window", [64, 16])
        vr = validate_kothe(e.space.matrix, jv, kv)
        self._stage("validate", vr.as_dict())
        if not vr.valid:
            self.extra_failures.append("matrix validation")
        cont = []
        for n in range(1, min(kv, 8) + 1):
            try:
                cont.append(check_continuity(e.space.matrix, n, n + 16, jv).as_dict())
            except NoContinuityWitness as exc:
                cont.append({"n": n, "witness_m": None, "error": str(exc)})
                self.extra_failures.append(f"continuity n={n}")
        self._stage("continuity", cont)
        mem = {}
        for key, seq in (("x", e.x), ("y", e.y)):
            r = membership(seq, e.space, kv)
            mem[key] = r.as_dict()
            if r.verdict == "not_member":
                self.extra_failures.append(f"membership of {key}")
        self._stage("membership", mem)

    def metric(self):
        return metric_d(self.exp.x, self.exp.y, self.exp.space)

    def witness_profile(self):
        e = self.exp
        cap = e.sched.get("horizon_cap", 100000)
        hz = [h for h in e.stats.get("profile_horizons", DEFAULT_HORIZONS) if h <= cap]
        self.profile = profile(e.x, e.y, sorted(set(e.stats["t_grid"])), sorted(set(hz)), e.space)
        self._stage("witness_profile", self.profile.as_dict())
        return self.profile

    def build(self):
        e, s = self.exp, self.exp.sched
        faithful = s["mode"] == "faithful"
        gap = parse_gap(s["gap"]) if "gap" in s else FAITHFUL_GAP
        h = parse_gap(s["h"]) if "h" in s else FAITHFUL_H
        cap = s.get("index_cap", 100000)
        hcap = min(s.get("horizon_cap", cap), cap)
        eta_seq = s.get("eta_seq", "harmonic")
        eta = (lambda k: 1.0 / (k + 1)) if eta_seq == "harmonic" else list(eta_seq)
        cands = range(1, hcap + 1) if s.get("candidates", "all") == "all" else None
        retries, samples = s.get("retries", 8), s.get("samples", 64)
        ds = find_density_schedule(e.x, e.y, e.raw["witness"]["delta"], eta, hcap, e.space, cands)
        self._stage("density_schedule", ds.as_dict())
        sched = refine_gap_schedule(ds, gap, e.y, e.space, s["k_max"], index_cap=cap, h=h,
                                    mode="faithful" if faithful else "scaled",
                                    retries=retries, samples=samples)
        self.schedule = sched
        self._stage("schedule", sched.as_dict())
        self.checks += sched.checks()
        nu = build_nu(e.y, sched)
        mem = nu_membership(nu, sched, e.space)
        self.checks += mem
        self._stage("nu", {"blocks": [list(b) for b in nu.blocks],
                           "membership": [c.as_dict() for c in mem]})
        select_k_subsequence(sched, nu, e.space, retries=retries, samples=samples)
        self.checks += sched.tail10_checks
        self._stage("schedule", sched.as_dict())
        layout = build_sign_layout(sched, s.get("n_max", 2), s.get("l_max", 3), cap)
        self.layout = layout
        self.checks += layout.checks
        self._stage("layout", layout.as_dict(intervals=False))
        nb, nb_checks = build_nu_bar(nu, layout, e.space)
        self.checks += nb_checks
        self._stage("nu_bar", {"checks": [c.as_dict() for c in nb_checks]})
        fam = emit_family(nb, e.fam["alphas"], e.fam.get("max_offset", 0),
                          e.fam.get("separation_floor", 0.1), nu=nu)
        self.family = fam
        self._stage("family", fam.as_dict())
        return fam

    def verify(self):
        e, s = self.exp, self.exp.sched
        rep = verify_construction(self.family, self.schedule, self.layout, e.y, e.space,
                                  samples=s.get("samples", 64),
                                  case2_range=s.get("case2_range", "shifted"))
        self.checks += rep.checks()
        self._stage("construction", rep.as_dict())
        st = e.stats
        al = aligned_horizons(self.schedule, self.layout)
        horizons = al["all"] if st.get("horizons", "aligned") == "aligned" else sorted(set(st["horizons"]))
        t_grid = sorted(set(st["t_grid"]))
        fr = verify_scrambled_family(self.family, st.get("pair_budget", 10), st["epsilon"], t_grid,
                                     horizons, st["eta"], e.space, seed=e.seed)
        act = []
        for rec in sorted({(r["alpha"], r["beta"]) for r in rep.activated}):
            for off in range(self.family.max_offset + 1):
                a, b = (rec[0], off), (rec[1], off)
                v = classify_pair(self.family.member(a), self.family.member(b), st["epsilon"],
                                  t_grid, horizons, st["eta"], e.space, identical=False)
                act.append({"a": list(a), "b": list(b), **v.as_dict()})
        self._stage("pairs", {"horizons": horizons, "aligned": al, **fr.as_dict(),
                              "case1_activated": act,
                              "note": "finite-horizon evidence; limits are not computed"})
        if fr.counts["refuted_at_horizon"]:
            self.extra_failures.append("refuted member pair")

    def finish(self, error: dict | None = None) -> int:
        summ = summarize(self.checks)
        failing = [c.as_dict() for c in self.checks if not c.passed][:50]
        self.report["summary"] = {"checks": summ, "failing_checks": failing,
                                  "other_failures": self.extra_failures}
        if error is not None:
            self.report["status"] = "failed"
            self.report["error"] = error
            return EXIT_CHECKS
        if summ["failed"] or self.extra_failures:
            self.report["status"] = "checks_failed"
            return EXIT_CHECKS
        return EXIT_OK


def _error_record(stage: str, exc: Exception) -> dict:
    return {"stage": stage, "type": type(exc).__name__, "message": str(exc),
            "k": getattr(exc, "k", None)}


def run_pipeline(exp: Experiment, upto: str = "verify") -> tuple[Pipeline, int]:
    pipe = Pipeline(exp)
    stage = "validate"
    try:
        pipe.validate()
        stage = "profile"
        pipe.witness_profile()
        stage = "build"
        pipe.build()
        if upto == "verify":
            stage = "verify"
            pipe.verify()
    except (ScheduleError, UncertifiedTailError, ValueError, AssertionError) as exc:
        log.error("%s stage failed: %s", stage, exc)
        partial = getattr(exc, "partial", None)
        if partial is not None:
            pipe.checks += partial.checks()
            pipe._stage("schedule", {**partial.as_dict(), "partial": True})
        return pipe, pipe.finish(_error_record(stage, exc))
    return pipe, pipe.finish()


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False,
                      default=_json_default) + "\n"


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _clean(obj):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(obj, float):
        if obj != obj:
            return "nan"
        if obj in (float("inf"), float("-inf")):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_outputs(pipe: Pipeline, out: Path, formats) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        p = out / "report.json"
        p.write_text(_dump(_clean(pipe.report)))
        written.append(p)
    if "csv" in formats and pipe.profile is not None:
        p = out / "profiles.csv"
        p.write_text(profile_to_csv(pipe.profile))
        written.append(p)
    if "layout" in formats and pipe.layout is not None:
        p = out / "layout.json"
        p.write_text(_dump(_clean(pipe.layout.as_dict())))
        written.append(p)
    return written


# ---------------------------------------------------------------- commands


def _out_dir(args, exp: Experiment) -> Path:
    return Path(args.out or exp.raw.get("output", {}).get("directory", "out"))


def _formats(exp: Experiment):
    return exp.raw.get("output", {}).get("formats", ["json", "csv", "layout"])


def cmd_validate(args, exp):
    pipe = Pipeline(exp)
    pipe.validate()
    st = pipe.report["stages"]
    print(f"matrix valid on window: {st['validate']['valid']}")
    for c in st["continuity"]:
        print(f"continuity n={c['n']}: m={c.get('witness_m')} sup={c.get('witness_sup')}")
    for key, m in st["membership"].items():
        print(f"membership of {key}: {m['verdict']}")
    return EXIT_CHECKS if pipe.extra_failures else EXIT_OK


def cmd_metric(args, exp):
    v = Pipeline(exp).metric()
    print(f"d(x, y) = {v.value:.17g}")
    print(f"truncation error <= {v.truncation_error_bound:.3g}")
    return EXIT_OK


def cmd_profile(args, exp):
    pipe = Pipeline(exp)
    prof = pipe.witness_profile()
    text = profile_to_csv(prof)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "profiles.csv").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _pipeline_cmd(upto):
    def cmd(args, exp):
        pipe, code = run_pipeline(exp, upto)
        out = _out_dir(args, exp)
        for p in write_outputs(pipe, out, _formats(exp)):
            log.info("wrote %s", p)
        s = pipe.report["summary"]["checks"]
        print(f"status: {pipe.report['status']}  checks: {s['passed']}/{s['total']} passed")
        if pipe.report["error"]:
            print(f"stopped at {pipe.report['error']['stage']}: {pipe.report['error']['message']}")
        if "pairs" in pipe.report["stages"]:
            print(f"pair verdicts: {pipe.report['stages']['pairs']['counts']}")
        print(f"report: {out / 'report.json'}")
        return code
    return cmd


def cmd_report(args):
    path = Path(args.report) if args.report else Path(args.out or "out") / "report.json"
    if not path.is_file():
        print(f"error: no report at {path}", file=sys.stderr)
        return EXIT_INPUT
    try:
        rep = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        print(f"error: {path}: line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return EXIT_INPUT
    summ = rep.get("summary", {}).get("checks", {})
    print(f"status: {rep.get('status')}   schema_version: {rep.get('schema_version')}")
    if rep.get("error"):
        print(f"error at {rep['error']['stage']}: {rep['error']['message']}")
    sched = rep.get("stages", {}).get("schedule")
    if sched:
        print(f"mode: {sched['mode']}  M: {sched['M']}")
        print(f"k-subsequence: {sched['k_seq']}")
    print(f"checks: {summ.get('passed', 0)}/{summ.get('total', 0)} passed")
    for name, t in summ.get("by_name", {}).items():
        print(f"  {name:28s} {t['passed']:6d}/{t['total']:<6d} certified {t['certified']}")
    pairs = rep.get("stages", {}).get("pairs")
    if pairs:
        print(f"pair verdicts: {pairs['counts']}  horizons: {pairs['horizons']}")
    for n in rep.get("stages", {}).get("construction", {}).get("notices", []):
        print(f"notice: {n}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "metric": cmd_metric,
    "profile": cmd_profile,
    "build": _pipeline_cmd("build"),
    "verify": _pipeline_cmd("verify"),
    "run": _pipeline_cmd("verify"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kothe-chaos", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in [*COMMANDS, "report"]:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="experiment config (JSON); defaults to the bundled instance")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="override the config seed")
        if name == "report":
            sp.add_argument("--report", help="path to report.json (default <out>/report.json)")
    return ap


def main(argv=None) -> int:
    level = getattr(logging, os.environ.get("KOTHE_CHAOS_LOG", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level if isinstance(level, int) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "report":
        return cmd_report(args)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_INPUT
    try:
        exp = load_config(args.config or bundled_config_path(), args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return COMMANDS[args.command](args, exp)


if __name__ == "__main__":
    sys.exit(main())
