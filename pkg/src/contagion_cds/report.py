"""Three-way validation: closed form vs quadrature vs Monte Carlo."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import closed_form as cf
from . import pricing
from .mc_oracle import PathSample, RandomSource, pricing_horizon, simulate
from .model import FirmId, SymmetricCompetitorParams
from .pricing import AccrualMode, SwapSchedule, build_schedule
from .quadrature import QuadConfig, leg_integrals, survival_from_density

QUAD_TOL = 1e-8
Z_LIMIT = 4.0
ANNUITY_SUM_TOL = 1e-12

# fractions of maturity; the two sets never coincide so the grid avoids t1 == t2
GRID_T1 = (0.08, 0.26, 0.44, 0.62, 0.92)
GRID_T2 = (0.17, 0.35, 0.53, 0.71, 1.0)
MARGINAL_POINTS = (0.2, 0.4, 0.6, 0.8, 1.0)

BOUND_GRID_B = (0.25, 0.5, 0.75)  # fractions of b0
BOUND_GRID_DELTA = (0.0, 0.1, 0.5)
BOUND_GRID_T = (1.0, 5.0, 10.0)
INEQUALITY_POINTS = 10_000
INEQUALITY_X_MAX = 50.0


@dataclass
class Row:
    name: str
    closed_form: float
    quadrature: float | None
    mc_mean: float | None
    mc_stderr: float | None
    abs_diff_cf_quad: float | None = None
    z_score_cf_mc: float | None = None
    passed: bool | None = None

    def judge(self, gate: bool = True) -> Row:
        """Fill the difference columns; ``gate=False`` leaves ``passed`` unset."""
        ok = True
        if self.quadrature is not None:
            self.abs_diff_cf_quad = abs(self.closed_form - self.quadrature)
            ok &= self.abs_diff_cf_quad <= QUAD_TOL * max(1.0, abs(self.closed_form))
        if self.mc_mean is not None:
            if self.mc_stderr:
                self.z_score_cf_mc = (self.mc_mean - self.closed_form) / self.mc_stderr
            else:
                self.z_score_cf_mc = 0.0 if self.mc_mean == self.closed_form else math.inf
            ok &= abs(self.z_score_cf_mc) <= Z_LIMIT
        self.passed = bool(ok) if gate else None
        return self

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


@dataclass
class ValidationReport:
    rows: list[Row]
    checks: list[dict]
    accrual_ratio: float
    ratio_prediction: float
    premium_summed: float
    premium_paper: float
    informational: list[Row] = field(default_factory=list)
    bound_comparison: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows) and all(c["pass"] for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "pass": self.passed,
            "rows": [r.as_dict() for r in self.rows],
            "checks": self.checks,
            "accrual_ratio": self.accrual_ratio,
            "ratio_prediction": self.ratio_prediction,
            "premium_summed": self.premium_summed,
            "premium_paper": self.premium_paper,
            "informational": [r.as_dict() for r in self.informational],
            "bound_comparison": self.bound_comparison,
        }


def joint_grid(maturity: float) -> list[tuple[float, float]]:
    return [(a * maturity, b * maturity) for a in GRID_T1 for b in GRID_T2]


def marginal_grid(maturity: float) -> list[float]:
    return [f * maturity for f in MARGINAL_POINTS]


def inequality_sweep() -> dict:
    xs = np.linspace(INEQUALITY_X_MAX / INEQUALITY_POINTS, INEQUALITY_X_MAX, INEQUALITY_POINTS)
    worst = math.inf
    for x in xs:
        lhs, rhs = pricing.premium_bound_gap(float(x))
        worst = min(worst, (lhs - rhs) / lhs)
    return {
        "name": "bound_inequality_sweep",
        "value": worst,
        "tolerance": -1e-15,
        "pass": worst >= -1e-15,
    }


def bound_comparison(params: SymmetricCompetitorParams, sched: SwapSchedule) -> list[dict]:
    out = []
    for bf in BOUND_GRID_B:
        p = SymmetricCompetitorParams(params.base_b, params.base_c, bf * params.base_b, params.atten_c)
        for delta in BOUND_GRID_DELTA:
            for maturity in BOUND_GRID_T:
                s = build_schedule(maturity, sched.interval, delta, sched.rate)
                brk = pricing.swap_premium(p, s, AccrualMode.PAPER)
                bound = pricing.premium_upper_bound(p, s)
                out.append(
                    {
                        "b": p.atten_b,
                        "delta": delta,
                        "maturity": maturity,
                        "premium_paper": brk.premium,
                        "premium_summed": brk.premium_other_mode,
                        "bound": bound,
                        "paper_within_bound": brk.premium <= bound,
                        "summed_within_bound": brk.premium_other_mode <= bound,
                    }
                )
    return out


def build_report(
    params: SymmetricCompetitorParams,
    sched: SwapSchedule,
    paths: int,
    seed: int,
    workers: int = 1,
    quad: QuadConfig | None = None,
    sample: PathSample | None = None,
) -> ValidationReport:
    quad = quad or QuadConfig()
    if sample is None:
        sample = simulate(params, pricing_horizon(sched), paths, RandomSource(seed), workers)
    T = sched.maturity
    rows: list[Row] = []

    for t1, t2 in joint_grid(T):
        est = sample.joint_survival(t1, t2)
        rows.append(
            Row(
                f"joint_survival({t1:g},{t2:g})",
                cf.joint_survival(params, t1, t2),
                survival_from_density(params, t1, t2, quad),
                est.mean,
                est.stderr,
            )
        )
    for firm in FirmId:
        for t in marginal_grid(T):
            point = (t, 0.0) if firm is FirmId.B else (0.0, t)
            est = sample.joint_survival(*point)
            rows.append(
                Row(
                    f"marginal_{firm.value.lower()}({t:g})",
                    cf.marginal_survival(params, firm, t),
                    survival_from_density(params, *point, quad),
                    est.mean,
                    est.stderr,
                )
            )

    legs = leg_integrals(params, sched, quad)
    annuity_mc, protection_mc, accrual_mc = sample.legs(sched)
    brk = pricing.swap_premium(params, sched, AccrualMode.SUMMED)
    rows.append(Row("annuity", brk.annuity, legs.annuity, annuity_mc.mean, annuity_mc.stderr))
    rows.append(
        Row("protection", brk.protection, legs.protection, protection_mc.mean, protection_mc.stderr)
    )
    for i, est in enumerate(sample.accrual_terms(sched), start=1):
        rows.append(
            Row(
                f"accrual_term({i})",
                pricing.accrual_term(params, sched, i),
                legs.accrual_terms[i - 1],
                est.mean,
                est.stderr,
            )
        )
    rows.append(
        Row("accrual_summed", brk.accrual_summed, legs.accrual, accrual_mc.mean, accrual_mc.stderr)
    )
    premium_mc = sample.premium(sched)
    rows.append(
        Row("premium_summed", brk.premium, legs.premium(), premium_mc.mean, premium_mc.stderr)
    )
    for row in rows:
        row.judge()

    closed_sum = pricing.annuity_closed_sum(params, sched)
    checks = [
        {
            "name": "annuity_closed_sum_vs_direct",
            "value": abs(closed_sum - brk.annuity),
            "tolerance": ANNUITY_SUM_TOL,
            "pass": abs(closed_sum - brk.annuity) <= ANNUITY_SUM_TOL,
        },
        inequality_sweep(),
    ]

    ratio = brk.accrual_summed / brk.accrual_condensed
    informational = [
        Row("accrual_condensed", brk.accrual_condensed, None, None, None),
        Row("premium_paper", brk.premium_other_mode, None, premium_mc.mean, premium_mc.stderr),
        Row("premium_upper_bound", pricing.premium_upper_bound(params, sched), None, None, None),
    ]
    for row in informational:
        row.judge(gate=False)

    return ValidationReport(
        rows=rows,
        checks=checks,
        accrual_ratio=ratio,
        ratio_prediction=-math.expm1(-brk.beta * T),
        premium_summed=brk.premium,
        premium_paper=brk.premium_other_mode,
        informational=informational,
        bound_comparison=bound_comparison(params, sched),
    )
