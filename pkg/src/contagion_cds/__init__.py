"""Two-firm default contagion with geometrically attenuating jumps.

Closed-form joint and marginal default-time laws for the symmetric competitor
case, the resulting single-name CDS premium, and two independent oracles
(exact Monte Carlo of the intensity model and adaptive quadrature of the
joint density) to check them.
"""
from .closed_form import (
    independent_joint_survival,
    joint_density,
    joint_survival,
    marginal_survival,
    survival_increment_and_bound,
)
from .mc_oracle import Estimate, RandomSource, simulate
from .model import ContagionParams, FirmId, InvalidParameters, SymmetricCompetitorParams, validate
from .pricing import AccrualMode, PricingBreakdown, SwapSchedule, build_schedule, swap_premium
from .quadrature import QuadConfig

__all__ = [
    "AccrualMode",
    "ContagionParams",
    "Estimate",
    "FirmId",
    "InvalidParameters",
    "PricingBreakdown",
    "QuadConfig",
    "RandomSource",
    "SwapSchedule",
    "SymmetricCompetitorParams",
    "build_schedule",
    "independent_joint_survival",
    "joint_density",
    "joint_survival",
    "marginal_survival",
    "simulate",
    "survival_increment_and_bound",
    "swap_premium",
    "validate",
]
