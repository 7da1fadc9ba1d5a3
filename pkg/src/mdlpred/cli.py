"""Experiment runner: scenario + predictor + horizon -> CSV + verdicts.

Configs are flat key=value text files; every key can also be set or
overridden on the command line.  Two modes:

  loss run:   mdlpred --scenario prop4:N=3 --predictor mdl --horizon 262144 \
                      --window hoeffding --out out --threads 4
  check run:  mdlpred --suite lemma2 --out out

The loss run writes one CSV per (scenario, predictor) and prints
machine-parseable key=value summary lines, including the bound checks
that apply to the scenario (cluster lower bound, instantaneous bound
violation count, mixture bound, half-complexity observation).  The exit
code is nonzero when any printed check fails.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from fractions import Fraction

import numpy as np

from .coding import kraft_sum, ComplexityAssignment
from .dyadic import Dyadic, parse_dyadic
from .engine import LossCurve, cumulative_loss
from .info import InequalityReport, check_lemma1, check_lemma2, check_lemma3
from .intervals import build_construction, condition14_check, delta_profile, distortion_params
from .model import ParamClass
from .oracle import oracle_expected_loss
from .scenarios import Scenario, prop4_class, qbstar_class, resolve_scenario

SUITES = ("lemma1", "lemma2", "lemma3", "intervals", "condition14", "oracle")


# -- config plumbing -----------------------------------------------------------


def parse_config_file(path: str) -> dict:
    """Flat key=value lines; '#' comments; repeated theta/kw lines build
    the values/kws lists of a finite class."""
    opts: dict = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            val = val.strip("\"'")
            if key in ("theta", "kw"):
                dst = "values" if key == "theta" else "kws"
                opts[dst] = f"{opts[dst]};{val}" if dst in opts else val
            else:
                opts[key] = val
    return opts


def parse_scenario_inline(text: str) -> dict:
    """'prop4:N=3' -> {'scenario': 'prop4', 'N': '3'}."""
    parts = text.split(":")
    opts = {"scenario": parts[0].strip()}
    for p in parts[1:]:
        if "=" not in p:
            raise ValueError(f"bad scenario parameter {p!r} in {text!r}")
        k, v = p.split("=", 1)
        opts[k.strip()] = v.strip()
    return opts


def _safe_name(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in name).strip("_")


# -- loss runs -----------------------------------------------------------------


def _prop5_bound(n: int, kw0: float) -> float:
    return (
        math.log(2) * kw0 / (2 * n)
        + math.sqrt(2 * math.log(2) * kw0 * math.log(n)) / n
        + 6 * math.log(n) / n
    )


def _class_kraft(pc: ParamClass) -> float:
    """Upward-rounded sum of the class's own weights 2^-Kw."""
    from .coding import _add_rounded_up, _pow2_rounded_up

    s = 0.0
    for p in pc.params:
        s = _add_rounded_up(s, _pow2_rounded_up(p.kw))
    return s


def run_loss(options: dict, out_dir: str, threads: int) -> int:
    scenario = resolve_scenario(options)
    predictor = str(options.get("predictor", "mdl"))
    horizon = int(options.get("horizon", 1000))
    window = str(options.get("window", "auto"))
    pc = scenario.pc

    curve = cumulative_loss(
        pc,
        predictor,
        horizon,
        window=window,
        partition=scenario.partition,
        workers=threads,
        scenario=scenario.name,
    )
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"loss_{_safe_name(scenario.name)}_{predictor}.csv")
    curve.write_csv(csv_path)

    lines = [
        f"scenario={scenario.name}",
        f"predictor={predictor}",
        f"horizon={horizon}",
        f"window={window}",
        f"threads={threads}",
        f"cumulative_lower={float(curve.cumulative_lower[-1])!r}",
        f"cumulative_upper={float(curve.cumulative_upper[-1])!r}",
        f"beyond_horizon_unbounded={curve.beyond_horizon}",
        f"csv={csv_path}",
    ]
    failures = 0

    if predictor in ("mdl", "ml") and horizon >= 3:
        kw_eff = pc.kw0 if predictor == "mdl" else 0.0
        upper = curve.window_loss + curve.tail_bound
        viol = sum(
            1 for n in range(3, horizon + 1) if upper[n - 1] > _prop5_bound(n, kw_eff)
        )
        ok = viol == 0
        failures += 0 if ok else 1
        lines.append(f"check_instantaneous_bound={'PASS' if ok else 'FAIL'} violations={viol}")

    if predictor == "mdl" and scenario.name.startswith("prop4"):
        n_exp = int(scenario.extras["N"])
        bound = (2.0**n_exp - 5.0) / 84.0
        ok = bool(curve.cumulative_lower[-1] >= bound)
        failures += 0 if ok else 1
        lines.append(f"check_cluster_lower_bound={'PASS' if ok else 'FAIL'} bound={bound!r}")
        for label, val in curve.by_selected().items():
            lines.append(f"C_selected_{label}={val!r}")
        for label, val in curve.by_alpha().items():
            lines.append(f"C_alpha_{label}={val!r}")

    if predictor == "bayes":
        ks = _class_kraft(pc)
        lines.append(f"kraft_sum={ks!r}")
        bound = pc.kw0 * math.log(2)
        if ks <= 1.0:
            ok = bool(curve.cumulative_lower.max() <= bound)
            failures += 0 if ok else 1
            lines.append(f"check_mixture_bound={'PASS' if ok else 'FAIL'} bound={bound!r}")
        else:
            lines.append(f"check_mixture_bound=SKIPPED(not sub-Kraft) bound={bound!r}")

    if predictor == "mdl" and scenario.name.startswith(("qbstar", "distorted")):
        bound = 0.5 * pc.kw0
        ok = bool(curve.cumulative_lower[-1] <= bound)
        failures += 0 if ok else 1
        lines.append(f"check_half_complexity={'PASS' if ok else 'FAIL'} bound={bound!r}")

    for line in lines:
        print(line)
    print(f"exit={1 if failures else 0}")
    return 1 if failures else 0


# -- check suites --------------------------------------------------------------


def _write_report_csv(path: str, reports: list[InequalityReport]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lemma", "statement", "grid_size", "violations", "worst_slack"])
        for r in reports:
            for row in r.csv_rows():
                w.writerow(row)


def _suite_intervals(out_dir: str) -> tuple[bool, str]:
    fig = build_construction(parse_dyadic("3/16"), 8)
    types = "".join(s.step_type for s in fig[:4])
    ok = types == "lclc"
    ok &= fig[1].j == (Fraction(1, 8), Fraction(3, 8))
    ok &= fig[3].i_parts == (
        (Fraction(1, 8), Fraction(5, 32)),
        (Fraction(7, 32), Fraction(1, 4)),
    )
    steps_path = os.path.join(out_dir, "interval_steps_3_16.csv")
    with open(steps_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "type", "j_lo", "j_hi", "i_parts"])
        for s in fig:
            w.writerow([s.k, s.step_type, s.j[0], s.j[1], " ".join(f"[{a},{b})" for a, b in s.i_parts)])
    dp_path = os.path.join(out_dir, "delta_profile_qbstar12_3_16.csv")
    sc = qbstar_class(12, "3/16")
    prof = delta_profile(sc.pc, 12)
    with open(dp_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "theta_i", "theta_j", "delta"])
        for r in prof.rows:
            ti = sc.pc.params[r.i_index].value if r.i_index is not None else ""
            w.writerow([r.k, ti, sc.pc.params[r.j_index].value, r.delta])

    rng = np.random.default_rng(31415)
    violations = 0
    for _ in range(100):
        ell = int(rng.integers(1, 11))
        bits = list(rng.integers(0, 2, ell - 1)) + [1]
        m = 0
        for b in bits:
            m = (m << 1) | int(b)
        t0 = Fraction(m, 1 << ell)
        if not 0 < t0 < 1:
            continue
        steps = build_construction(t0, 20)
        prev = (Fraction(0), Fraction(1))
        for s in steps:
            okk = s.i_measure() == Fraction(1, 1 << s.k)
            okk &= s.j_measure() == Fraction(1, 1 << s.k)
            okk &= s.j_contains(t0) and not s.i_contains(t0)
            okk &= s.i_sup_distance(t0) <= Fraction(1, 1 << (s.k - 1))
            okk &= prev[0] <= s.j[0] and s.j[1] <= prev[1]
            # complement property: I and J tile the parent core
            okk &= s.i_measure() + s.j_measure() == prev[1] - prev[0]
            if not okk:
                violations += 1
            prev = s.j
    ok &= violations == 0
    return ok, f"fig_steps={types} invariant_violations={violations} steps_csv={steps_path}"


def _suite_condition14(out_dir: str) -> tuple[bool, str]:
    rows = []
    ok = True
    for t0 in ("1/2", "3/16"):
        r = condition14_check(qbstar_class(10, t0).pc, 1.0, 0.0, 24)
        rows.append(["qbstar:max_len=10", t0, 1, 0, r.ok, "", ""])
        ok &= r.ok
    rp = condition14_check(prop4_class(3).pc, 1.0, 0.0, 24)
    witness_theta = prop4_class(3).pc.params[rp.witness[1]].value if rp.witness else ""
    rows.append(["prop4:N=3", "1/2", 1, 0, rp.ok, rp.witness[0] if rp.witness else "", witness_theta])
    ok &= not rp.ok and rp.witness is not None
    # distortion constants for the three reference polynomials
    d1 = distortion_params([0.0, 1.0], 0.5, 0.125)
    d2 = distortion_params([0.0, 0.0, 1.0], 0.5, 0.125)
    d3 = distortion_params([0.375, 0.75, -1.5, 1.0], 0.5, 0.125)
    ok &= (d1.order, d1.deriv_bound) == (1, 1.0)
    ok &= d2.order == 1 and abs(d2.deriv_bound - 0.75) < 1e-12
    ok &= d3.order == 3 and abs(d3.deriv_bound - 6.0) < 1e-12
    path = os.path.join(out_dir, "checks_condition14.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["class", "theta0", "a", "b", "passed", "witness_k", "witness_theta"])
        w.writerows(rows)
    return ok, f"csv={path} distortion_orders={d1.order},{d2.order},{d3.order}"


def _suite_oracle(out_dir: str) -> tuple[bool, str]:
    rows = []
    worst = 0.0
    for sc in (prop4_class(1), prop4_class(2), qbstar_class(2, "1/2"), qbstar_class(3, "1/2")):
        for pred in ("mdl", "bayes", "ml"):
            curve = cumulative_loss(sc.pc, pred, 32, window="full")
            for n in range(1, 33):
                exact = oracle_expected_loss(sc.pc, pred, n)
                fast = float(curve.window_loss[n - 1])
                ex = float(exact)
                rel = abs(fast - ex) / max(1e-12, abs(ex)) if ex != 0.0 else abs(fast)
                worst = max(worst, rel)
                rows.append([sc.name, pred, n, repr(fast), f"{exact.numerator}/{exact.denominator}", repr(rel)])
    path = os.path.join(out_dir, "checks_oracle.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "predictor", "n", "fast", "exact", "rel_err"])
        w.writerows(rows)
    return worst <= 1e-10, f"worst_rel={worst!r} csv={path}"


def run_checks(suite: str, out_dir: str) -> int:
    os.makedirs(out_dir, exist_ok=True)
    if suite not in SUITES:
        print(f"error=unknown suite {suite!r}; valid: {', '.join(SUITES)}", file=sys.stderr)
        return 2
    if suite in ("lemma1", "lemma2", "lemma3"):
        report = {"lemma1": check_lemma1, "lemma2": check_lemma2, "lemma3": check_lemma3}[suite]()
        path = os.path.join(out_dir, f"checks_{suite}.csv")
        _write_report_csv(path, [report])
        print(f"suite={suite}")
        print(f"violations={report.violations}")
        print(f"worst_slack={report.worst_slack!r}")
        print(f"csv={path}")
        ok = report.ok
    elif suite == "intervals":
        ok, detail = _suite_intervals(out_dir)
        print(f"suite=intervals")
        print(detail)
    elif suite == "condition14":
        ok, detail = _suite_condition14(out_dir)
        print(f"suite=condition14")
        print(detail)
    else:
        ok, detail = _suite_oracle(out_dir)
        print(f"suite=oracle")
        print(detail)
    print(f"result={'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


# -- entry point ---------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="mdlpred",
        description="Expected square loss experiments for discrete Bernoulli prediction",
    )
    ap.add_argument("--config", help="flat key=value config file")
    ap.add_argument("--scenario", help="scenario name with inline params, e.g. prop4:N=3")
    ap.add_argument("--predictor", choices=("mdl", "bayes", "ml"))
    ap.add_argument("--horizon", type=int)
    ap.add_argument("--window", choices=("full", "hoeffding", "auto"))
    ap.add_argument("--out", default=None, help="output directory (default: out)")
    ap.add_argument("--threads", type=int, default=None, help="worker processes")
    ap.add_argument("--suite", help=f"run a check suite instead: {', '.join(SUITES)}")
    args = ap.parse_args(argv)

    options: dict = {}
    try:
        if args.config:
            options.update(parse_config_file(args.config))
        if args.scenario:
            options.update(parse_scenario_inline(args.scenario))
        for key in ("predictor", "horizon", "window"):
            val = getattr(args, key)
            if val is not None:
                options[key] = val
        out_dir = args.out or options.get("out", "out")
        threads = args.threads if args.threads is not None else int(options.get("threads", 1))
        suite = args.suite or options.get("suite")
        if suite:
            return run_checks(str(suite), out_dir)
        if "scenario" not in options:
            ap.error("need --scenario (or a config with one), or --suite")
        return run_loss(options, out_dir, threads)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error={exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
