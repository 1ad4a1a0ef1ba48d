"""End-to-end acceptance criteria, each at its stated tolerance and time budget.

Every test records one ``PASS``/``FAIL`` line, printed in the terminal summary.
"""
import math
import time

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES
from contagion_cds import cli
from contagion_cds import closed_form as cf
from contagion_cds import pricing
from contagion_cds.mc_oracle import RandomSource, pricing_horizon, simulate
from contagion_cds.model import FirmId, SymmetricCompetitorParams
from contagion_cds.pricing import AccrualMode
from contagion_cds.quadrature import leg_integrals, mixed_partial, survival_from_density
from contagion_cds.report import bound_comparison, build_report, inequality_sweep, joint_grid

N_PATHS = 1_000_000
SEED = 42
MC_BUDGET = 60.0
TIMINGS: dict[int, float] = {}


def record(number: int, title: str, ok: bool, detail: str, elapsed: float, budget: float) -> None:
    TIMINGS[number] = elapsed
    in_time = elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"[{status}] {number:>2}. {title}: {detail}; {elapsed:.2f}s (budget {budget:g}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def random_params(rng: np.random.Generator, n: int) -> list[SymmetricCompetitorParams]:
    out = []
    for _ in range(n):
        b0, c0 = rng.uniform(0.01, 2.0, 2)
        out.append(SymmetricCompetitorParams(b0, c0, rng.uniform(0, b0), rng.uniform(0, c0)))
    return out


@pytest.fixture(scope="module")
def param_grid():
    rng = np.random.default_rng(20240601)
    return [(p, rng.uniform(0.0, 20.0, 20)) for p in random_params(rng, 50)]


def test_01_diagonal_identity(param_grid):
    start = time.perf_counter()
    worst = 0.0
    for p, ts in param_grid:
        for t in map(float, ts):
            worst = max(worst, abs(cf.joint_survival(p, t, t) - math.exp(-(p.base_b + p.base_c) * t)))
    record(1, "diagonal identity", worst < 1e-13, f"max err {worst:.2e} < 1e-13",
           time.perf_counter() - start, 1.0)


def test_02_marginal_consistency(param_grid):
    start = time.perf_counter()
    worst = 0.0
    for p, ts in param_grid:
        for t in map(float, ts):
            worst = max(
                worst,
                abs(cf.joint_survival(p, t, 0.0) - cf.marginal_survival(p, FirmId.B, t)),
                abs(cf.joint_survival(p, 0.0, t) - cf.marginal_survival(p, FirmId.C, t)),
            )
    record(2, "marginal consistency", worst < 1e-13, f"max err {worst:.2e} < 1e-13",
           time.perf_counter() - start, 1.0)


def test_03_density_survival_duality(p0, sched):
    start = time.perf_counter()
    worst = 0.0
    for t1, t2 in joint_grid(sched.maturity):
        worst = max(worst, abs(survival_from_density(p0, t1, t2) - cf.joint_survival(p0, t1, t2)))
    record(3, "density-survival duality", worst <= 1e-8, f"max abs err {worst:.2e} <= 1e-8",
           time.perf_counter() - start, 30.0)


def test_04_finite_difference_density(p0):
    start = time.perf_counter()
    points = [(1.5, 0.5), (0.5, 1.5), (0.2, 3.0), (3.0, 0.2), (2.0, 4.0),
              (4.0, 2.0), (0.7, 0.3), (0.3, 0.7), (6.0, 9.0), (9.0, 6.0)]
    worst = 0.0
    for t1, t2 in points:
        exact = cf.density_value(p0, t1, t2)
        worst = max(worst, abs(mixed_partial(p0, t1, t2, h=1e-4) - exact) / exact)
    record(4, "finite-difference density", worst < 1e-4, f"max rel err {worst:.2e} < 1e-4",
           time.perf_counter() - start, 1.0)


@pytest.fixture(scope="module")
def mc_run(p0, sched):
    start = time.perf_counter()
    sample = simulate(p0, pricing_horizon(sched), N_PATHS, RandomSource(SEED))
    report = build_report(p0, sched, N_PATHS, SEED, sample=sample)
    return sample, report, time.perf_counter() - start


def test_05_mc_vs_closed_form(mc_run):
    _, report, elapsed = mc_run
    start = time.perf_counter()
    zs = {r.name: r.z_score_cf_mc for r in report.rows}
    worst_name = max(zs, key=lambda k: abs(zs[k]))
    count = len(zs)
    ok = count == 25 + 10 + 1 + 1 + 20 + 1 + 1 and all(abs(z) <= 4 for z in zs.values())
    record(5, "MC vs closed form", ok,
           f"{count} quantities, max |z| {abs(zs[worst_name]):.2f} ({worst_name}) <= 4",
           elapsed + time.perf_counter() - start, MC_BUDGET)


def test_06_leg_algebra(p0, sched):
    start = time.perf_counter()
    brk = pricing.swap_premium(p0, sched)
    legs = leg_integrals(p0, sched)
    sum_err = abs(pricing.annuity_closed_sum(p0, sched) - brk.annuity)
    prot_rel = abs(legs.protection - brk.protection) / brk.protection
    term_rel = max(
        abs(q - pricing.accrual_term(p0, sched, i)) / pricing.accrual_term(p0, sched, i)
        for i, q in enumerate(legs.accrual_terms, start=1)
    )
    ok = sum_err <= 1e-12 and prot_rel <= 1e-8 and term_rel <= 1e-8
    record(6, "leg algebra", ok,
           f"annuity sum err {sum_err:.1e}, protection rel {prot_rel:.1e}, worst term rel {term_rel:.1e}",
           time.perf_counter() - start, 10.0)


def test_07_condensed_accrual_adjudication(p0, sched):
    start = time.perf_counter()
    brk = pricing.swap_premium(p0, sched)
    legs = leg_integrals(p0, sched)
    rel = abs(legs.accrual - brk.accrual_summed) / brk.accrual_summed
    ratio = brk.accrual_summed / brk.accrual_condensed
    prediction = -math.expm1(-brk.beta * sched.maturity)
    record(7, "condensed accrual adjudication", rel <= 1e-8,
           f"summed vs quadrature rel {rel:.1e}; reported ratio {ratio:.15f} vs 1-exp(-beta T) {prediction:.15f}",
           time.perf_counter() - start, 5.0)


def test_08_independence_limit(p0, sched):
    start = time.perf_counter()
    tiny = SymmetricCompetitorParams(0.1, 0.2, 1e-8, 1e-8)
    worst = max(
        abs(cf.joint_survival(tiny, t1, t2) - math.exp(-0.1 * t1 - 0.2 * t2))
        for t1, t2 in joint_grid(sched.maturity)
    )
    zero = SymmetricCompetitorParams(0.1, 0.2, 0.0, 0.0)
    s = simulate(zero, 1e6, 100_000, RandomSource(SEED))
    p_b = stats.kstest(s.tau_b, "expon", args=(0, 10.0)).pvalue
    p_c = stats.kstest(s.tau_c, "expon", args=(0, 5.0)).pvalue
    ok = worst <= 1e-6 and p_b > 1e-3 and p_c > 1e-3
    record(8, "independence limit", ok,
           f"closed form err {worst:.1e} <= 1e-6, KS p-values {p_b:.3f}, {p_c:.3f} > 1e-3",
           time.perf_counter() - start, 10.0)


def test_09_survival_increment_bound():
    start = time.perf_counter()
    rng = np.random.default_rng(99)
    params = random_params(rng, 10_000)
    ts = rng.uniform(0.0, 50.0, 10_000)
    bad = 0
    for p, t in zip(params, map(float, ts)):
        for firm in FirmId:
            inc = cf.survival_increment_and_bound(p, firm, t)
            bad += not (0.0 <= inc.increment <= inc.bound)
    record(9, "survival increment bound", bad == 0, f"{bad} violations in 10^4 draws x 2 firms",
           time.perf_counter() - start, 1.0)


def test_10_premium_bound_remark(p0, sched):
    start = time.perf_counter()
    sweep = inequality_sweep()
    grid = bound_comparison(p0, sched)
    held = sum(g["paper_within_bound"] for g in grid)
    record(10, "premium bound remark", sweep["pass"] and len(grid) == 27,
           f"scalar inequality worst rel gap {sweep['value']:.2e}; "
           f"paper-mode premium within bound at {held}/27 grid points (recorded)",
           time.perf_counter() - start, 1.0)


def test_11_determinism(tmp_path, capsys):
    outputs, elapsed = [], []
    for i, workers in enumerate((1, 1, 4)):
        target = tmp_path / f"validate{i}.json"
        start = time.perf_counter()
        code = cli.main(["validate", "--workers", str(workers), "--out", str(target)])
        elapsed.append(time.perf_counter() - start)
        capsys.readouterr()
        assert code == 0
        outputs.append(target.read_bytes())
    identical = outputs[0] == outputs[1]
    workers_same = outputs[0] == outputs[2]
    pair = elapsed[0] + elapsed[1]
    measured = TIMINGS.get(5)
    ratio = f"{pair / measured:.2f}x measured criterion 5" if measured else "criterion 5 not run"
    # budget is twice criterion 5's budget; the workers=4 run is extra
    record(11, "determinism", identical and workers_same,
           f"repeat run identical: {identical}; workers=4 identical: {workers_same}; "
           f"repeat pair took {ratio}",
           pair, 2.0 * MC_BUDGET)
