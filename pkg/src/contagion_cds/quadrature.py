"""Numerical-integration oracle for the closed-form survival and pricing legs.

Integrals are iterated 1-D adaptive Gauss-Kronrod (QUADPACK via scipy) and
are always split on the line ``t1 == t2`` where the density jumps. Infinite
upper limits are cut at a point where an analytic envelope of the density
guarantees the discarded mass is below ``tail_epsilon``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy import integrate

from .closed_form import density_value, joint_survival
from .model import SymmetricCompetitorParams, check
from .pricing import SwapSchedule


class QuadratureError(ArithmeticError):
    """Integration did not meet its tolerance within the subdivision budget."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    tail_epsilon: float = 1e-12
    max_subdivisions: int = 100_000

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "tail_epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_subdivisions < 100:
            raise ValueError("max_subdivisions must be at least 100")


def _quad(func, a: float, b: float, cfg: QuadConfig, breaks=(), scale: float = 1.0):
    """Integrate over [a, b], splitting at interior ``breaks``; returns (value, error)."""
    cuts = [a] + sorted(x for x in set(breaks) if a < x < b) + [b]
    total, err = [], 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            res = integrate.quad(
                func,
                lo,
                hi,
                epsabs=cfg.abs_tol * scale,
                epsrel=cfg.rel_tol * scale,
                limit=cfg.max_subdivisions,
                full_output=1,
            )
        value, abserr = res[0], res[1]
        if len(res) > 3 and abserr > max(cfg.abs_tol, cfg.rel_tol * abs(value)):
            raise QuadratureError(f"quadrature on [{lo}, {hi}] failed: {res[3]}", value, abserr)
        total.append(value)
        err += abserr
    return math.fsum(total), err


def tail_mass_bound(params: SymmetricCompetitorParams, cutoff: float) -> float:
    """Upper bound on P(tau_B > cutoff or tau_C > cutoff) from the density envelope.

    Uses ``f(t1, t2) <= b0 c0 (1 + m (t1 + t2)) exp(-b0 t1 - c0 t2)`` with
    ``m = max(b, c)``.
    """
    b0, c0 = params.base_b, params.base_c
    m = max(params.atten_b, params.atten_c)
    over_b = math.exp(-b0 * cutoff) * (1.0 + m * (cutoff + 1.0 / b0) + m / c0)
    over_c = math.exp(-c0 * cutoff) * (1.0 + m / b0 + m * (cutoff + 1.0 / c0))
    return over_b + over_c


def truncation_point(params: SymmetricCompetitorParams, eps: float, floor: float = 0.0) -> float:
    """Smallest power-of-two multiple of an e-folding beyond which the tail is < ``eps``."""
    fold = 1.0 / min(params.base_b, params.base_c)
    cutoff = max(fold, floor)
    while tail_mass_bound(params, cutoff) >= eps:
        cutoff *= 2.0
    lo, hi = max(floor, cutoff / 2.0), cutoff
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tail_mass_bound(params, mid) < eps:
            hi = mid
        else:
            lo = mid
    return max(hi, floor)


def survival_from_density(
    params: SymmetricCompetitorParams,
    t1: float,
    t2: float,
    cfg: QuadConfig | None = None,
    t_max: float | None = None,
) -> float:
    """Integrate the joint density over ``[t1, inf) x [t2, inf)``."""
    cfg = cfg or QuadConfig()
    check(params)
    if t1 < 0 or t2 < 0:
        raise ValueError("times must be non-negative")
    top = t_max if t_max is not None else truncation_point(params, cfg.tail_epsilon, max(t1, t2))
    if top <= max(t1, t2):
        return 0.0
    span = top - t2

    def inner(y: float) -> float:
        value, _ = _quad(lambda x: density_value(params, x, y), t1, top, cfg, (y,), 1.0 / span)
        return value

    value, _ = _quad(inner, t2, top, cfg, (t1,))
    return value


def mixed_partial(
    params: SymmetricCompetitorParams, t1: float, t2: float, h: float = 1e-4
) -> float:
    """Central four-point estimate of d^2 S / dt1 dt2 from the survival surface."""
    if not h > 0:
        raise ValueError("step must be positive")
    if abs(t1 - t2) < 2.0 * h:
        raise ValueError("point is within 2h of the diagonal where the density jumps")
    if min(t1, t2) - h < 0:
        raise ValueError("stencil leaves the non-negative quadrant")
    s = lambda a, b: joint_survival(params, a, b)  # noqa: E731
    return (s(t1 + h, t2 + h) - s(t1 + h, t2 - h) - s(t1 - h, t2 + h) + s(t1 - h, t2 - h)) / (
        4.0 * h * h
    )


def inner_tail_mass(params: SymmetricCompetitorParams, t2: float, lo: float) -> float:
    """Closed integral of the density over ``t1 in [lo, inf)`` at fixed ``t2 <= lo``.

    Only the ``t1 > t2`` piece is involved; its antiderivative is
    exponential times linear, giving ``c0 exp(-c0 t2 - b0 lo) (1 + b (lo - t2))``.
    """
    if lo < t2:
        raise ValueError("lower limit must not be below t2")
    b0, c0, b = params.base_b, params.base_c, params.atten_b
    return c0 * math.exp(-c0 * t2 - b0 * lo) * (1.0 + b * (lo - t2))


@dataclass(frozen=True)
class LegIntegrals:
    protection: float
    accrual_terms: tuple[float, ...]
    annuity: float

    @property
    def accrual(self) -> float:
        return math.fsum(self.accrual_terms)

    def premium(self) -> float:
        return self.protection / (self.annuity + self.accrual)


def leg_integrals(
    params: SymmetricCompetitorParams,
    sched: SwapSchedule,
    cfg: QuadConfig | None = None,
) -> LegIntegrals:
    """Quadrature values of the protection leg, each accrual period, and the annuity.

    The protection and accrual integrands use :func:`inner_tail_mass` for the
    ``t1`` direction and adaptive quadrature in ``t2``. The annuity sums the
    discounted diagonal survival ``survival_from_density(T_i, T_i)``.
    """
    cfg = cfg or QuadConfig()
    check(params)
    r, delta, dt = sched.rate, sched.settlement_lag, sched.interval

    def protection_integrand(t2: float) -> float:
        return math.exp(-r * (t2 + delta)) * inner_tail_mass(params, t2, t2 + delta)

    protection, _ = _quad(protection_integrand, 0.0, sched.maturity, cfg)

    terms = []
    for i in range(1, sched.n_payments + 1):
        lo = sched.period_start(i)
        hi = sched.payment_dates[i - 1]

        def accrual_integrand(t2: float, lo=lo) -> float:
            return math.exp(-r * t2) * (t2 - lo) / dt * inner_tail_mass(params, t2, t2)

        value, _ = _quad(accrual_integrand, lo, hi, cfg)
        terms.append(value)

    annuity = math.fsum(
        math.exp(-r * t) * survival_from_density(params, t, t, cfg) for t in sched.payment_dates
    )
    return LegIntegrals(protection, tuple(terms), annuity)

