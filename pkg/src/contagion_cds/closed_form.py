"""Closed-form default-time distribution for the symmetric competitor model.

All functions take :class:`SymmetricCompetitorParams` (b0, c0, b, c) and are
exact for ``b < b0``, ``c < c0``. Joint survival is written as

    exp(-b0 t1 - c0 t2) * (1 + (c / b0) * g(b0 (t2 - t1)))    for t1 <= t2
    exp(-b0 t1 - c0 t2) * (1 + (b / c0) * g(c0 (t1 - t2)))    for t2 <  t1

with ``g(x) = exp(-x) - 1 + x``. Expanding ``g`` gives the familiar two-term
form (see :func:`joint_survival_branch`); the factored version is exact on
the diagonal and stays finite at ``b = 0`` or ``c = 0``.
"""
from __future__ import annotations

import math
import warnings
from typing import NamedTuple

from .model import FirmId, SymmetricCompetitorParams, check

# below this argument g(x) is summed as a series; expm1(-x) + x loses ~eps/x
SERIES_CUTOFF = 1e-2


class HorizonWarning(UserWarning):
    """Evaluation point lies beyond the horizon the formulas are stated on."""


class JointDensity(NamedTuple):
    value: float
    diagonal: bool


class SurvivalIncrement(NamedTuple):
    increment: float
    bound: float


def excess_exp(x: float) -> float:
    """``exp(-x) - 1 + x`` without cancellation for small ``x``."""
    if abs(x) < SERIES_CUTOFF:
        # x^2/2 - x^3/6 + x^4/24 - ... ; 8 terms reach eps at the cutoff
        term = x * x / 2.0
        total = term
        for k in range(3, 11):
            term *= -x / k
            total += term
        return total
    return math.expm1(-x) + x


def excess_exp_ratio(x: float) -> float:
    """``2 g(x) / x^2``, which lies in (0, 1] for ``x >= 0`` and is 1 at 0."""
    if abs(x) < SERIES_CUTOFF:
        # 1 - x/3 + x^2/12 - ... ; each coefficient 2 / k!
        term, total = 1.0, 1.0
        for k in range(3, 12):
            term *= -x / k
            total += term
        return min(total, 1.0)
    return 2.0 * (math.expm1(-x) + x) / (x * x)


def _check_times(*ts: float) -> None:
    for t in ts:
        if t < 0 or math.isnan(t):
            raise ValueError(f"times must be non-negative, got {t}")


def _horizon(horizon: float | None, *ts: float) -> None:
    if horizon is not None and max(ts) > horizon:
        warnings.warn(
            f"evaluation point {ts} exceeds horizon {horizon}", HorizonWarning, stacklevel=3
        )


def joint_survival(
    params: SymmetricCompetitorParams,
    t1: float,
    t2: float,
    *,
    horizon: float | None = None,
) -> float:
    """P(tau_B > t1, tau_C > t2)."""
    check(params)
    _check_times(t1, t2)
    _horizon(horizon, t1, t2)
    b0, c0, b, c = params.base_b, params.base_c, params.atten_b, params.atten_c
    base = math.exp(-b0 * t1 - c0 * t2)
    if t1 <= t2:
        return base * (1.0 + (c / b0) * excess_exp(b0 * (t2 - t1)))
    return base * (1.0 + (b / c0) * excess_exp(c0 * (t1 - t2)))


def joint_survival_branch(
    params: SymmetricCompetitorParams, t1: float, t2: float, branch: int
) -> float:
    """Evaluate one branch of the expanded two-term survival formula.

    ``branch=1`` is the ``t1 <= t2`` piece, ``branch=2`` the ``t2 < t1`` piece;
    either may be evaluated anywhere, which is what continuity checks need.
    Requires ``b > 0`` and ``c > 0``.
    """
    b0, c0, b, c = params.base_b, params.base_c, params.atten_b, params.atten_c
    base = math.exp(-b0 * t1 - c0 * t2)
    if branch == 1:
        return c * (t2 - t1 + 1.0 / c - 1.0 / b0) * base + (c / b0) * math.exp(-(b0 + c0) * t2)
    if branch == 2:
        return b * (t1 - t2 + 1.0 / b - 1.0 / c0) * base + (b / c0) * math.exp(-(b0 + c0) * t1)
    raise ValueError("branch must be 1 or 2")


def density_value(params: SymmetricCompetitorParams, t1: float, t2: float) -> float:
    """Joint density without validation or flags; the quadrature hot path."""
    b0, c0, b, c = params.base_b, params.base_c, params.atten_b, params.atten_c
    base = b0 * c0 * math.exp(-b0 * t1 - c0 * t2)
    if t1 < t2:
        # c b0 c0 [(t2 - t1) + 1/c - 1/c0] e^{...}, multiplied through by c
        return base * (c * (t2 - t1) + 1.0 - c / c0)
    return base * (b * (t1 - t2) + 1.0 - b / b0)


def joint_density(params: SymmetricCompetitorParams, t1: float, t2: float) -> JointDensity:
    """Joint density of (tau_B, tau_C) at ``(t1, t2)``.

    The density jumps across ``t1 == t2`` unless ``c * b0 == b * c0``. On the
    diagonal the ``t2 < t1`` piece is returned with ``diagonal=True``.
    """
    check(params)
    _check_times(t1, t2)
    return JointDensity(density_value(params, t1, t2), t1 == t2)


def diagonal_limits(params: SymmetricCompetitorParams, t: float) -> tuple[float, float]:
    """One-sided density limits at ``(t, t)``: (from t2 < t1, from t1 < t2)."""
    check(params)
    _check_times(t)
    b0, c0, b, c = params.base_b, params.base_c, params.atten_b, params.atten_c
    decay = math.exp(-(b0 + c0) * t)
    return c0 * (b0 - b) * decay, b0 * (c0 - c) * decay


def marginal_survival(params: SymmetricCompetitorParams, firm: FirmId, t: float) -> float:
    """P(tau_B > t) or P(tau_C > t)."""
    if firm is FirmId.B:
        return joint_survival(params, t, 0.0)
    return joint_survival(params, 0.0, t)


def survival_increment_and_bound(
    params: SymmetricCompetitorParams, firm: FirmId, t: float
) -> SurvivalIncrement:
    """Survival gained from the partner's default, and its quadratic envelope.

    For firm B the increment is ``(b/c0) e^{-b0 t} g(c0 t)`` and the envelope
    ``b c0 t^2 e^{-b0 t} / 2``; firm C swaps the roles.
    """
    check(params)
    _check_times(t)
    if firm is FirmId.B:
        own, other, shock = params.base_b, params.base_c, params.atten_b
    else:
        own, other, shock = params.base_c, params.base_b, params.atten_c
    bound = 0.5 * shock * other * t * t * math.exp(-own * t)
    # bound * ratio with ratio <= 1 keeps increment <= bound after rounding
    return SurvivalIncrement(bound * excess_exp_ratio(other * t), bound)


def independent_joint_survival(b0: float, c0: float, t1: float, t2: float) -> float:
    """Joint survival when the jumps vanish: a product of exponentials."""
    if b0 <= 0 or c0 <= 0:
        raise ValueError("b0 and c0 must be positive")
    _check_times(t1, t2)
    return math.exp(-b0 * t1 - c0 * t2)
