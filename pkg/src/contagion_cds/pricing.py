"""Single-name CDS premium when the protection seller and the reference name
default-contagion each other.

Firm B sells protection on firm C to a buyer who never defaults. Unit notional,
zero recovery, flat short rate ``r``. The premium is a per-period amount paid
at each schedule date while both B and C survive, plus the premium accrued
between the last date and C's default (only if B is still alive then). The
seller pays 1 at ``tau_C + delta`` if it survives until then.

Throughout, ``beta = b0 + c0 + r``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .model import SymmetricCompetitorParams, check

RATIO_TOL = 1e-9


class AccrualMode(enum.Enum):
    SUMMED = "summed"
    PAPER = "paper"


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class SwapSchedule:
    maturity: float
    interval: float
    n_payments: int
    payment_dates: tuple[float, ...]
    settlement_lag: float
    rate: float

    def period_start(self, i: int) -> float:
        """T_{i-1} for the 1-based payment index ``i``."""
        return 0.0 if i == 1 else self.payment_dates[i - 2]


def build_schedule(
    maturity: float, interval: float, settlement_lag: float = 0.0, rate: float = 0.0
) -> SwapSchedule:
    problems = []
    if not maturity > 0:
        problems.append(f"maturity must be > 0 (got {maturity})")
    if not interval > 0:
        problems.append(f"interval must be > 0 (got {interval})")
    if not settlement_lag >= 0:
        problems.append(f"settlement_lag must be >= 0 (got {settlement_lag})")
    if not rate >= 0:
        problems.append(f"rate must be >= 0 (got {rate})")
    if problems:
        raise ScheduleError("; ".join(problems))
    ratio = maturity / interval
    n = round(ratio)
    if n < 1 or abs(ratio - n) > RATIO_TOL:
        raise ScheduleError(
            f"maturity {maturity} is not a whole number of intervals {interval} "
            f"({ratio:g} payments)"
        )
    dates = tuple((i + 1) * interval for i in range(n))
    return SwapSchedule(
        maturity=float(maturity),
        interval=float(interval),
        n_payments=n,
        payment_dates=dates,
        settlement_lag=float(settlement_lag),
        rate=float(rate),
    )


def beta(params: SymmetricCompetitorParams, sched: SwapSchedule) -> float:
    return params.base_b + params.base_c + sched.rate


def annuity_factor(params: SymmetricCompetitorParams, sched: SwapSchedule) -> float:
    """Sum over dates of the discounted probability that both firms survive.

    Returns the direct sum; :func:`annuity_closed_sum` is the geometric form.
    """
    check(params)
    b = beta(params, sched)
    return math.fsum(math.exp(-b * t) for t in sched.payment_dates)


def annuity_closed_sum(params: SymmetricCompetitorParams, sched: SwapSchedule) -> float:
    b = beta(params, sched)
    x = b * sched.interval
    if x == 0.0:
        return float(sched.n_payments)
    return math.exp(-x) * -math.expm1(-b * sched.maturity) / -math.expm1(-x)


def protection_leg(params: SymmetricCompetitorParams, sched: SwapSchedule) -> float:
    """PV of the seller's payment at ``tau_C + delta`` if it survives the lag."""
    check(params)
    b0, c0, b = params.base_b, params.base_c, params.atten_b
    bt = beta(params, sched)
    delta, r = sched.settlement_lag, sched.rate
    # b (1/b + delta) written as 1 + b delta so b = 0 is allowed
    lag_factor = (1.0 + b * delta) * math.exp(-(r + b0) * delta)
    return c0 * lag_factor * _one_minus_exp_over(bt, sched.maturity)


def _one_minus_exp_over(rate: float, t: float) -> float:
    # (1 - e^{-rate t}) / rate, with the rate -> 0 limit t
    if rate == 0.0:
        return t
    return -math.expm1(-rate * t) / rate


def accrual_term(params: SymmetricCompetitorParams, sched: SwapSchedule, i: int) -> float:
    """PV of the premium fraction accrued in period ``i`` (1-based) before C defaults."""
    check(params)
    if not 1 <= i <= sched.n_payments:
        raise IndexError(f"payment index {i} outside 1..{sched.n_payments}")
    c0 = params.base_c
    bt = beta(params, sched)
    dt = sched.interval
    lo = sched.period_start(i)
    hi = sched.payment_dates[i - 1]
    e_lo = math.exp(-bt * lo)
    e_hi = math.exp(-bt * hi)
    return c0 / (bt * dt) * (
        lo * e_lo - hi * e_hi + (lo - 1.0 / bt) * (e_hi - e_lo)
    )


def accrual_factor(
    params: SymmetricCompetitorParams,
    sched: SwapSchedule,
    mode: AccrualMode = AccrualMode.SUMMED,
) -> float:
    """Accrued-premium factor A(T).

    ``SUMMED`` adds the per-period terms; ``PAPER`` is the condensed
    expression, which equals the summed value divided by ``1 - e^{-beta T}``.
    """
    if mode is AccrualMode.SUMMED:
        return math.fsum(accrual_term(params, sched, i) for i in range(1, sched.n_payments + 1))
    check(params)
    bt = beta(params, sched)
    x = bt * sched.interval
    em = math.exp(-x)
    return params.base_c / (bt * bt * sched.interval) / (1.0 - em) * (1.0 - em - x * em)


@dataclass(frozen=True)
class PricingBreakdown:
    beta: float
    annuity: float
    protection: float
    accrual_summed: float
    accrual_condensed: float
    premium: float
    mode: AccrualMode
    premium_other_mode: float = field(default=float("nan"))

    def accrual(self) -> float:
        return self.accrual_summed if self.mode is AccrualMode.SUMMED else self.accrual_condensed

    def balance_residual(self) -> float:
        """Premium leg minus protection leg at the quoted premium; zero by construction."""
        return (self.annuity + self.accrual()) * self.premium - self.protection

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "annuity": self.annuity,
            "protection": self.protection,
            "accrual_summed": self.accrual_summed,
            "accrual_condensed": self.accrual_condensed,
            "premium": self.premium,
            "mode": self.mode.value,
            "premium_other_mode": self.premium_other_mode,
        }


def swap_premium(
    params: SymmetricCompetitorParams,
    sched: SwapSchedule,
    mode: AccrualMode = AccrualMode.SUMMED,
) -> PricingBreakdown:
    check(params)
    annuity = annuity_factor(params, sched)
    protection = protection_leg(params, sched)
    summed = accrual_factor(params, sched, AccrualMode.SUMMED)
    condensed = accrual_factor(params, sched, AccrualMode.PAPER)
    chosen, other = (summed, condensed) if mode is AccrualMode.SUMMED else (condensed, summed)
    return PricingBreakdown(
        beta=beta(params, sched),
        annuity=annuity,
        protection=protection,
        accrual_summed=summed,
        accrual_condensed=condensed,
        premium=protection / (annuity + chosen),
        mode=mode,
        premium_other_mode=protection / (annuity + other),
    )


def premium_bound_gap(x: float) -> tuple[float, float]:
    """Both sides of ``1 - e^{-x} - x e^{-x} >= x^2 e^{-x} / 2``."""
    if x < 0:
        raise ValueError("x must be non-negative")
    ex = math.exp(-x)
    return -math.expm1(-x) - x * ex, 0.5 * x * x * ex


def premium_upper_bound(params: SymmetricCompetitorParams, sched: SwapSchedule) -> float:
    """Upper bound on the premium computed with the condensed accrual factor."""
    check(params)
    bt = beta(params, sched)
    lhs, rhs = premium_bound_gap(bt * sched.interval)
    if lhs < rhs:
        raise ArithmeticError(f"bound inequality fails at x={bt * sched.interval}")
    survive = -math.expm1(-bt * sched.maturity)
    return protection_leg(params, sched) * math.expm1(bt * sched.interval) / (
        0.5 * params.base_c * sched.interval + survive
    )
