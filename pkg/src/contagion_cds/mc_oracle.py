"""Exact simulation of the two default times and Monte Carlo estimators.

Before the first default both intensities are constant, so the first default
time is exponential with rate ``b0 + c0`` and it is C with probability
``c0 / (b0 + c0)``. After that the survivor's intensity is a deterministic
function of the lag, and its residual lifetime is drawn by inverting the
post-default cumulative hazard at a unit exponential. No time stepping and
no thinning.

Randomness: path ``k`` consumes the four uniforms Philox produces at counter
``k`` under the key ``(seed, stream_id)``. Paths are generated on a fixed
chunk grid, so the output is bitwise identical for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import (
    ContagionParams,
    DefaultTimePair,
    SymmetricCompetitorParams,
    check,
    invert_post_contagion_hazard,
    post_contagion_hazard,
)
from .pricing import SwapSchedule

CHUNK = 1 << 16
Z_BAND = 3.0


@dataclass(frozen=True)
class RandomSource:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64 or not 0 <= self.stream_id < 2**64:
            raise ValueError("seed and stream_id must fit in 64 unsigned bits")

    def uniforms(self, start: int, count: int) -> np.ndarray:
        """Uniforms for paths ``start .. start+count-1``, shape ``(count, 4)``."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        counter = np.array([start, 0, 0, 0], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key, counter=counter))
        return gen.random((count, 4))


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n: int
    ci_low: float
    ci_high: float

    @classmethod
    def from_moments(cls, mean: float, stderr: float, n: int) -> Estimate:
        mean, stderr = float(mean), float(stderr)
        return cls(mean, stderr, int(n), mean - Z_BAND * stderr, mean + Z_BAND * stderr)

    @classmethod
    def from_samples(cls, x: np.ndarray) -> Estimate:
        n = x.size
        mean = math.fsum(x) / n
        stderr = float(np.std(x, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
        return cls.from_moments(mean, stderr, n)

    def z_score(self, target: float) -> float:
        if self.stderr == 0.0:
            return 0.0 if self.mean == target else math.copysign(math.inf, self.mean - target)
        return (self.mean - target) / self.stderr

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n": self.n,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
        }


def _as_general(params) -> ContagionParams:
    if isinstance(params, SymmetricCompetitorParams):
        params = params.to_contagion()
    check(params)
    return params


def _sample_block(params: ContagionParams, horizon: float, u: np.ndarray):
    b0, c0 = params.base_b, params.base_c
    total = b0 + c0
    first = -np.log1p(-u[:, 0]) / total
    c_first = u[:, 1] < c0 / total
    level = -np.log1p(-u[:, 2])

    tau_b = np.full(first.shape, np.inf)
    tau_c = np.full(first.shape, np.inf)
    hit = first <= horizon
    tau_c[hit & c_first] = first[hit & c_first]
    tau_b[hit & ~c_first] = first[hit & ~c_first]

    # survivor B if C went first, else C
    a0 = np.where(c_first, params.base_b, params.base_c)
    a1 = np.where(c_first, params.jump_b, params.jump_c)
    a2 = np.where(c_first, params.atten_b, params.atten_c)
    room = np.where(hit, horizon - first, 0.0)
    reach = hit & (level <= post_contagion_hazard(a0, a1, a2, room))
    if reach.any():
        lag = invert_post_contagion_hazard(a0[reach], a1[reach], a2[reach], level[reach])
        when = first[reach] + lag
        surv_b = c_first[reach]
        idx = np.flatnonzero(reach)
        tau_b[idx[surv_b]] = when[surv_b]
        tau_c[idx[~surv_b]] = when[~surv_b]
    return tau_b, tau_c


def sample_default_times(
    params, horizon: float, rng: RandomSource, path: int = 0
) -> DefaultTimePair:
    """Default-time pair for a single path; +inf marks "after ``horizon``"."""
    params = _as_general(params)
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    tau_b, tau_c = _sample_block(params, horizon, rng.uniforms(path, 1))
    return DefaultTimePair(float(tau_b[0]), float(tau_c[0]))


@dataclass(frozen=True)
class PathSample:
    """Simulated default times on common paths, with estimators on top."""

    tau_b: np.ndarray
    tau_c: np.ndarray
    horizon: float

    @property
    def n(self) -> int:
        return self.tau_b.size

    def joint_survival(self, t1: float, t2: float) -> Estimate:
        if max(t1, t2) > self.horizon:
            raise ValueError("evaluation point beyond the simulated horizon")
        hits = np.count_nonzero((self.tau_b > t1) & (self.tau_c > t2))
        p = hits / self.n
        return Estimate.from_moments(p, math.sqrt(p * (1.0 - p) / self.n), self.n)

    def leg_payoffs(self, sched: SwapSchedule):
        """Per-path annuity, protection and accrual payoffs plus each path's accrual period."""
        needed = sched.maturity + sched.settlement_lag
        if needed > self.horizon:
            raise ValueError(f"simulated horizon {self.horizon} shorter than T + delta = {needed}")
        r, delta = sched.rate, sched.settlement_lag
        dates = np.asarray(sched.payment_dates)
        disc = np.concatenate(([0.0], np.cumsum(np.exp(-r * dates))))
        first = np.minimum(self.tau_b, self.tau_c)
        annuity = disc[np.searchsorted(dates, first, side="left")]

        tc = self.tau_c
        in_window = tc <= sched.maturity
        with np.errstate(over="ignore"):
            protection = np.where(
                in_window & (self.tau_b > tc + delta), np.exp(-r * (tc + delta)), 0.0
            )
        grid = np.concatenate(([0.0], dates))
        period = np.where(in_window, np.searchsorted(grid, tc, side="left"), 0)
        live = in_window & (self.tau_b > tc)
        start = grid[np.maximum(period - 1, 0)]
        with np.errstate(invalid="ignore", over="ignore"):
            accrual = np.where(live, np.exp(-r * tc) * (tc - start) / sched.interval, 0.0)
        period = np.where(live, period, 0)
        return annuity, protection, accrual, period

    def legs(self, sched: SwapSchedule) -> tuple[Estimate, Estimate, Estimate]:
        annuity, protection, accrual, _ = self.leg_payoffs(sched)
        return (
            Estimate.from_samples(annuity),
            Estimate.from_samples(protection),
            Estimate.from_samples(accrual),
        )

    def accrual_terms(self, sched: SwapSchedule) -> list[Estimate]:
        """One estimate per payment period, in schedule order."""
        _, _, accrual, period = self.leg_payoffs(sched)
        n = self.n
        size = sched.n_payments + 1
        s1 = np.bincount(period, weights=accrual, minlength=size)
        s2 = np.bincount(period, weights=accrual * accrual, minlength=size)
        out = []
        for i in range(1, size):
            mean = s1[i] / n
            var = max(s2[i] - n * mean * mean, 0.0) / (n - 1) if n > 1 else 0.0
            out.append(Estimate.from_moments(mean, math.sqrt(var / n), n))
        return out

    def premium(self, sched: SwapSchedule) -> Estimate:
        """Ratio estimator protection / (annuity + accrual) with a delta-method error."""
        annuity, protection, accrual, _ = self.leg_payoffs(sched)
        denom = annuity + accrual
        n = self.n
        p_bar = math.fsum(protection) / n
        d_bar = math.fsum(denom) / n
        if d_bar <= 0:
            raise ZeroDivisionError("premium leg estimate is not positive")
        ratio = p_bar / d_bar
        if n < 2:
            return Estimate.from_moments(ratio, 0.0, n)
        cov = np.cov(np.vstack([protection, denom]), ddof=1)
        var = (cov[0, 0] - 2.0 * ratio * cov[0, 1] + ratio * ratio * cov[1, 1]) / (d_bar * d_bar)
        return Estimate.from_moments(ratio, math.sqrt(max(var, 0.0) / n), n)


def simulate(
    params,
    horizon: float,
    n: int,
    rng: RandomSource,
    workers: int = 1,
) -> PathSample:
    """Simulate ``n`` paths; any ``workers`` value gives the same arrays."""
    params = _as_general(params)
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if n < 1:
        raise ValueError("need at least one path")
    starts = range(0, n, CHUNK)

    def run(start: int):
        return _sample_block(params, horizon, rng.uniforms(start, min(CHUNK, n - start)))

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, starts))
    else:
        blocks = [run(s) for s in starts]
    tau_b = np.concatenate([b[0] for b in blocks])
    tau_c = np.concatenate([b[1] for b in blocks])
    return PathSample(tau_b, tau_c, float(horizon))


def pricing_horizon(sched: SwapSchedule) -> float:
    return sched.maturity + sched.settlement_lag + sched.interval


def estimate_joint_survival(
    params, t1: float, t2: float, n: int, rng: RandomSource, workers: int = 1
) -> Estimate:
    if t1 < 0 or t2 < 0:
        raise ValueError("times must be non-negative")
    horizon = max(t1, t2, 1e-12)
    return simulate(params, horizon, n, rng, workers).joint_survival(t1, t2)


def estimate_legs(
    params, sched: SwapSchedule, n: int, rng: RandomSource, workers: int = 1
) -> tuple[Estimate, Estimate, Estimate]:
    return simulate(params, pricing_horizon(sched), n, rng, workers).legs(sched)


def estimate_premium(
    params, sched: SwapSchedule, n: int, rng: RandomSource, workers: int = 1
) -> Estimate:
    return simulate(params, pricing_horizon(sched), n, rng, workers).premium(sched)
