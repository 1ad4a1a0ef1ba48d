"""Intensity model for two firms whose defaults move each other's hazard rate.

Firm B's intensity is ``b0`` until firm C defaults; afterwards it becomes

    b0 + b1 / (b2 * (t - tau_C) + 1)

so the shock ``b1`` fades hyperbolically with the lag since the partner's
default. Firm C is symmetric with ``(c0, c1, c2)``. B sells protection, C is
the reference name.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

HAZARD_TOL = 1e-12
MAX_ITER = 200


class FirmId(enum.Enum):
    B = "B"
    C = "C"

    @property
    def partner(self) -> FirmId:
        return FirmId.C if self is FirmId.B else FirmId.B


class InvalidParameters(ValueError):
    """Raised when a parameter set violates one or more model constraints."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid parameters: " + "; ".join(self.violations))


@dataclass(frozen=True)
class ContagionParams:
    """General six-parameter model.

    Attributes:
        base_b, base_c: firm-specific intensities (per year).
        jump_b, jump_c: intensity shift at the partner's default; negative for
            competitors, positive for copartners.
        atten_b, atten_c: attenuation speed of the shift (per year); zero keeps
            the jump constant forever.
    """

    base_b: float
    base_c: float
    jump_b: float
    jump_c: float
    atten_b: float
    atten_c: float

    def triple(self, firm: FirmId) -> tuple[float, float, float]:
        """(base, jump, atten) governing ``firm`` once its partner has defaulted."""
        if firm is FirmId.B:
            return self.base_b, self.jump_b, self.atten_b
        return self.base_c, self.jump_c, self.atten_c


@dataclass(frozen=True)
class SymmetricCompetitorParams:
    """Competitor case where the jump and attenuation share one parameter.

    ``atten_b = b`` means ``jump_b = -b`` and ``atten_b = b`` in the general
    model, and likewise for C. ``b = c = 0`` is the independent model.
    """

    base_b: float
    base_c: float
    atten_b: float
    atten_c: float

    def to_contagion(self) -> ContagionParams:
        return ContagionParams(
            base_b=self.base_b,
            base_c=self.base_c,
            jump_b=-self.atten_b,
            jump_c=-self.atten_c,
            atten_b=self.atten_b,
            atten_c=self.atten_c,
        )


@dataclass(frozen=True)
class DefaultTimePair:
    tau_b: float
    tau_c: float


def _finite(name: str, value: float, out: list[str]) -> bool:
    if not math.isfinite(value):
        out.append(f"{name} must be finite")
        return False
    return True


def validate(params: ContagionParams | SymmetricCompetitorParams) -> list[str]:
    """Return the names of violated constraints; an empty list means valid."""
    if isinstance(params, SymmetricCompetitorParams):
        out: list[str] = []
        fields = {
            "b0": params.base_b,
            "c0": params.base_c,
            "b": params.atten_b,
            "c": params.atten_c,
        }
        if not all(_finite(k, v, out) for k, v in fields.items()):
            return out
        if params.base_b <= 0:
            out.append("b0>0")
        if params.base_c <= 0:
            out.append("c0>0")
        if params.atten_b < 0:
            out.append("b>=0")
        if params.atten_c < 0:
            out.append("c>=0")
        if params.atten_b >= params.base_b:
            out.append("b<b0")
        if params.atten_c >= params.base_c:
            out.append("c<c0")
        return out

    out = []
    fields = {
        "b0": params.base_b,
        "c0": params.base_c,
        "b1": params.jump_b,
        "c1": params.jump_c,
        "b2": params.atten_b,
        "c2": params.atten_c,
    }
    if not all(_finite(k, v, out) for k, v in fields.items()):
        return out
    if params.base_b <= 0:
        out.append("b0>0")
    if params.base_c <= 0:
        out.append("c0>0")
    if params.atten_b < 0:
        out.append("b2>=0")
    if params.atten_c < 0:
        out.append("c2>=0")
    if params.base_b + params.jump_b <= 0:
        out.append("b0+b1>0")
    if params.base_c + params.jump_c <= 0:
        out.append("c0+c1>0")
    return out


def check(params: ContagionParams | SymmetricCompetitorParams) -> None:
    violations = validate(params)
    if violations:
        raise InvalidParameters(violations)


def intensity(
    params: ContagionParams,
    firm: FirmId,
    t: float,
    partner_default: float | None = None,
) -> float:
    """Default intensity of ``firm`` at time ``t`` given the partner's default time."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if partner_default is not None and partner_default < 0:
        raise ValueError(f"partner_default must be non-negative, got {partner_default}")
    base, jump, atten = params.triple(firm)
    if partner_default is None or partner_default > t:
        return base
    return base + jump / (atten * (t - partner_default) + 1.0)


def post_contagion_hazard(a0, a1, a2, s):
    """Cumulative hazard accrued over a lag ``s`` after the partner's default.

    ``a0 * s + (a1 / a2) * log(a2 * s + 1)``, or ``(a0 + a1) * s`` when
    ``a2 == 0``. Broadcasts over numpy arrays; scalars in give a float out.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("lag s must be non-negative")
    a0 = np.asarray(a0, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    out = a0 * s_arr + a1 * _log_ratio(a2, s_arr)
    return float(out) if out.ndim == 0 else out


def _log_ratio(a2, s):
    # log1p(a2 s) / a2, continuous at a2 = 0 where it equals s
    pos = a2 > 0
    safe = np.where(pos, a2, 1.0)
    return np.where(pos, np.log1p(safe * s) / safe, s)


def _rate(a0, a1, a2, s):
    return a0 + a1 / (a2 * s + 1.0)


def invert_post_contagion_hazard(a0, a1, a2, e):
    """Lag ``s >= 0`` at which the post-default cumulative hazard reaches ``e``.

    Safeguarded Newton inside a bisection bracket. The bracket starts at
    ``[0, 1]`` and its upper end doubles until it covers ``e``. Converges to
    ``|hazard(s) - e| <= 1e-12``; broadcasts over arrays.
    """
    e_arr = np.asarray(e, dtype=float)
    if np.any(e_arr < 0):
        raise ValueError("hazard level e must be non-negative")
    a0, a1, a2, e_arr = np.broadcast_arrays(
        np.asarray(a0, dtype=float),
        np.asarray(a1, dtype=float),
        np.asarray(a2, dtype=float),
        e_arr,
    )
    scalar = e_arr.ndim == 0
    a0, a1, a2, e_arr = (np.atleast_1d(x).astype(float) for x in (a0, a1, a2, e_arr))

    lo = np.zeros_like(e_arr)
    hi = np.ones_like(e_arr)
    short = post_contagion_hazard(a0, a1, a2, hi) < e_arr
    for _ in range(2048):
        if not short.any():
            break
        hi[short] *= 2.0
        short = post_contagion_hazard(a0, a1, a2, hi) < e_arr
    else:
        raise RuntimeError("could not bracket the hazard level")

    s = np.where(e_arr == 0.0, 0.0, 0.5 * hi)
    done = e_arr == 0.0
    for _ in range(MAX_ITER):
        f = post_contagion_hazard(a0, a1, a2, s) - e_arr
        done |= np.abs(f) <= HAZARD_TOL
        if done.all():
            break
        lo = np.where(f < 0, s, lo)
        hi = np.where(f > 0, s, hi)
        step = s - f / _rate(a0, a1, a2, s)
        inside = (step > lo) & (step < hi)
        s = np.where(done, s, np.where(inside, step, 0.5 * (lo + hi)))
    else:
        raise RuntimeError(
            f"hazard inversion failed to converge in {MAX_ITER} iterations"
        )
    return float(s[0]) if scalar else s
