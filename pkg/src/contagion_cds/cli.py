"""Command-line entry point: ``contagion-cds {price,curves,simulate,validate,sweep}``.

Exit codes: 0 success/pass, 1 validation failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace

import numpy as np

from . import closed_form as cf
from . import config as cfgmod
from . import pricing
from .mc_oracle import RandomSource, pricing_horizon, simulate
from .model import FirmId, SymmetricCompetitorParams, check
from .pricing import AccrualMode, ScheduleError, build_schedule
from .report import build_report, marginal_grid

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

CURVE_COLUMNS = [
    "t1", "t2", "joint_survival", "joint_density", "marginal_b", "marginal_c",
    "increment_b", "bound_b", "increment_c", "bound_c",
]
SWEEP_COLUMNS = [
    "parameter", "value", "premium_summed", "premium_paper", "protection",
    "annuity", "accrual_summed", "accrual_paper",
]
SWEEP_PARAMS = ("b0", "c0", "b", "c", "r", "T", "dT", "delta")
REPORT_COLUMNS = [
    "name", "closed_form", "quadrature", "mc_mean", "mc_stderr",
    "abs_diff_cf_quad", "z_score_cf_mc", "pass",
]


def fmt(value) -> str:
    """Machine formatting: 17 significant digits, blanks for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def human(value) -> str:
    return format(value, ".6g") if isinstance(value, float) else str(value)


def to_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def emit(text: str, out_path: str | None, summary: list[tuple[str, object]] = ()) -> None:
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
        for key, value in summary:
            print(f"{key:<28} {human(value)}")
    else:
        sys.stdout.write(text)


def _inputs(run: cfgmod.RunConfig) -> dict:
    return {"model": run.raw["model"], "schedule": run.raw["schedule"]}


def cmd_price(run: cfgmod.RunConfig, args) -> int:
    params = run.symmetric()
    mode = AccrualMode(args.accrual)
    brk = pricing.swap_premium(params, run.schedule, mode)
    summed = brk.premium if mode is AccrualMode.SUMMED else brk.premium_other_mode
    paper = brk.premium_other_mode if mode is AccrualMode.SUMMED else brk.premium
    doc = {
        "inputs": _inputs(run),
        "breakdown": brk.as_dict(),
        "premium_summed": summed,
        "premium_paper": paper,
        "premium_upper_bound": pricing.premium_upper_bound(params, run.schedule),
    }
    if args.annualized:
        doc["premium_annualized"] = brk.premium / run.schedule.interval
    if run.out_format == "json":
        text = to_json(doc)
    else:
        flat = {**run.raw["model"], **run.raw["schedule"], **brk.as_dict()}
        flat.update({k: v for k, v in doc.items() if k not in ("inputs", "breakdown")})
        text = to_csv(list(flat), [flat])
    emit(text, run.out_path, [("premium", brk.premium), ("mode", mode.value)])
    return EXIT_OK


def curve_rows(params: SymmetricCompetitorParams, t_min: float, t_max: float, steps: int):
    if steps < 1 or t_max < t_min or t_min < 0:
        raise cfgmod.ConfigError("grid needs steps >= 1 and 0 <= t_min <= t_max")
    ts = np.linspace(t_min, t_max, steps) if steps > 1 else np.array([t_min])
    rows = []
    for t1 in map(float, ts):
        inc_b = cf.survival_increment_and_bound(params, FirmId.B, t1)
        for t2 in map(float, ts):
            inc_c = cf.survival_increment_and_bound(params, FirmId.C, t2)
            dens = cf.joint_density(params, t1, t2)
            rows.append(
                {
                    "t1": t1,
                    "t2": t2,
                    "joint_survival": cf.joint_survival(params, t1, t2),
                    "joint_density": None if dens.diagonal else dens.value,
                    "marginal_b": cf.marginal_survival(params, FirmId.B, t1),
                    "marginal_c": cf.marginal_survival(params, FirmId.C, t2),
                    "increment_b": inc_b.increment,
                    "bound_b": inc_b.bound,
                    "increment_c": inc_c.increment,
                    "bound_c": inc_c.bound,
                }
            )
    return rows


def cmd_curves(run: cfgmod.RunConfig, args) -> int:
    params = run.symmetric()
    t_max = args.t_max if args.t_max is not None else run.schedule.maturity
    rows = curve_rows(params, args.t_min, t_max, args.steps)
    text = to_csv(CURVE_COLUMNS, rows) if run.out_format == "csv" else to_json(rows)
    emit(text, run.out_path, [("rows", len(rows))])
    return EXIT_OK


def cmd_simulate(run: cfgmod.RunConfig, args) -> int:
    sched = run.schedule
    sample = simulate(run.model, pricing_horizon(sched), run.paths, RandomSource(run.seed), run.workers)
    rows = []
    for t in marginal_grid(sched.maturity):
        for name, point in (("marginal_b", (t, 0.0)), ("marginal_c", (0.0, t)), ("joint_diag", (t, t))):
            est = sample.joint_survival(*point)
            rows.append({"name": name, "t1": point[0], "t2": point[1], **est.as_dict()})
    annuity, protection, accrual = sample.legs(sched)
    for name, est in (("annuity", annuity), ("protection", protection), ("accrual", accrual),
                      ("premium", sample.premium(sched))):
        rows.append({"name": name, "t1": None, "t2": None, **est.as_dict()})
    if args.times_out:
        with open(args.times_out, "w", newline="") as fh:
            fh.write(to_csv(["tau_b", "tau_c"], [
                {"tau_b": float(b), "tau_c": float(c)} for b, c in zip(sample.tau_b, sample.tau_c)
            ]))
    if run.out_format == "csv":
        text = to_csv(["name", "t1", "t2", "mean", "stderr", "n", "ci_low", "ci_high"], rows)
    else:
        text = to_json({"inputs": _inputs(run), "paths": run.paths, "seed": run.seed, "estimates": rows})
    emit(text, run.out_path, [("paths", run.paths), ("premium", rows[-1]["mean"])])
    return EXIT_OK


def cmd_validate(run: cfgmod.RunConfig, args) -> int:
    params = run.symmetric()
    report = build_report(params, run.schedule, run.paths, run.seed, run.workers, run.quad)
    doc = report.as_dict()
    if run.out_format == "csv":
        rows = [r.as_dict() for r in report.rows] + [r.as_dict() for r in report.informational]
        rows += [
            {"name": c["name"], "closed_form": c["value"], "pass": c["pass"]} for c in report.checks
        ]
        rows.append({"name": "accrual_ratio", "closed_form": report.accrual_ratio})
        rows.append({"name": "ratio_prediction", "closed_form": report.ratio_prediction})
        text = to_csv(REPORT_COLUMNS, rows)
    else:
        doc["inputs"] = _inputs(run)
        doc["mc"] = {"paths": run.paths, "seed": run.seed}
        text = to_json(doc)
    emit(text, run.out_path, [
        ("pass", report.passed),
        ("accrual_ratio", report.accrual_ratio),
        ("1 - exp(-beta T)", report.ratio_prediction),
        ("premium (summed)", report.premium_summed),
        ("premium (paper)", report.premium_paper),
    ])
    if not args.out:
        print(
            f"accrual_ratio={report.accrual_ratio:.17g} 1-exp(-beta*T)={report.ratio_prediction:.17g}",
            file=sys.stderr,
        )
    return EXIT_OK if report.passed else EXIT_FAIL


def _swept(params: SymmetricCompetitorParams, sched, name: str, value: float):
    if name in ("b0", "c0", "b", "c"):
        field = {"b0": "base_b", "c0": "base_c", "b": "atten_b", "c": "atten_c"}[name]
        return replace(params, **{field: value}), sched
    maturity, interval, lag, rate = sched.maturity, sched.interval, sched.settlement_lag, sched.rate
    if name == "r":
        rate = value
    elif name == "T":
        maturity = value
    elif name == "dT":
        interval = value
    else:
        lag = value
    return params, build_schedule(maturity, interval, lag, rate)


def sweep_rows(params, sched, name: str, start: float, stop: float, steps: int) -> list[dict]:
    if name not in SWEEP_PARAMS:
        raise cfgmod.ConfigError(f"unknown sweep parameter {name!r}; choose from {SWEEP_PARAMS}")
    if steps < 1:
        raise cfgmod.ConfigError("sweep needs at least one step")
    values = np.linspace(start, stop, steps) if steps > 1 else np.array([start])
    rows = []
    for value in map(float, values):
        try:
            p, s = _swept(params, sched, name, value)
            check(p)
        except (ScheduleError, ValueError) as exc:
            raise cfgmod.ConfigError(f"{name}={value}: {exc}") from exc
        brk = pricing.swap_premium(p, s, AccrualMode.SUMMED)
        rows.append(
            {
                "parameter": name,
                "value": value,
                "premium_summed": brk.premium,
                "premium_paper": brk.premium_other_mode,
                "protection": brk.protection,
                "annuity": brk.annuity,
                "accrual_summed": brk.accrual_summed,
                "accrual_paper": brk.accrual_condensed,
            }
        )
    return rows


def cmd_sweep(run: cfgmod.RunConfig, args) -> int:
    rows = sweep_rows(run.symmetric(), run.schedule, args.param, args.start, args.stop, args.steps)
    text = to_csv(SWEEP_COLUMNS, rows) if run.out_format == "csv" else to_json(rows)
    emit(text, run.out_path, [("rows", len(rows))])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (see --print-schema)")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config field, e.g. model.b=0.03; repeatable")
    common.add_argument("--seed", type=int)
    common.add_argument("--paths", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="write machine output here instead of stdout")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--accrual", choices=[m.value for m in AccrualMode], default="summed")

    parser = argparse.ArgumentParser(
        prog="contagion-cds",
        description="Two-firm default contagion with attenuating jumps: curves, CDS premium, oracles.",
    )
    parser.add_argument("--print-schema", action="store_true", help="print the config JSON schema")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("price", parents=[common], help="CDS premium breakdown")
    p.add_argument("--annualized", action="store_true", help="also report premium / interval")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("curves", parents=[common], help="survival/density grid as CSV or JSON")
    p.add_argument("--t-min", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=None, help="defaults to the maturity")
    p.add_argument("--steps", type=int, default=11)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimates (general parameters allowed)")
    p.add_argument("--times-out", help="also dump every simulated (tau_b, tau_c) pair as CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", parents=[common], help="closed form vs quadrature vs Monte Carlo")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", parents=[common], help="premium and legs over one parameter")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--steps", type=int, default=11)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_schema:
        sys.stdout.write(to_json(cfgmod.SCHEMA))
        return EXIT_OK
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_CONFIG

    overrides = list(args.set)
    for flag, key in (("seed", "mc.seed"), ("paths", "mc.paths"), ("workers", "mc.workers"),
                      ("format", "output.format")):
        value = getattr(args, flag)
        if value is not None:
            overrides.append(f"{key}={json.dumps(value)}")
    if args.out:
        overrides.append(f"output.path={json.dumps(args.out)}")
    try:
        run = cfgmod.load(args.config, overrides)
        return args.func(run, args)
    except cfgmod.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
