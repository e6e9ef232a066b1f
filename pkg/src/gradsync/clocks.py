"""Hardware clocks driven by piecewise-constant drift schedules.

Rates are normalized to ``[1, 1 + rho]``: a hardware clock never runs slower
than real time.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

RANDOM_WALK_PERIOD = 10.0


class DriftKind(str, Enum):
    CONSTANT = "constant"
    ALTERNATING_EXTREMES = "alternating_extremes"
    RAMP_ACROSS_NODES = "ramp_across_nodes"
    SEEDED_RANDOM_WALK = "seeded_random_walk"


@dataclass(frozen=True)
class DriftSchedule:
    """Rate ``rates[i]`` holds on ``[starts[i], starts[i+1])``; the last one to the horizon."""

    kind: DriftKind
    starts: np.ndarray
    rates: np.ndarray
    horizon: float
    rho: float

    def __post_init__(self):
        if len(self.starts) != len(self.rates) or len(self.starts) == 0:
            raise ValueError("schedule needs matching, non-empty starts and rates")
        if self.starts[0] != 0.0 or np.any(np.diff(self.starts) <= 0):
            raise ValueError("segment starts must begin at 0 and increase")
        if np.any(self.rates < 1.0) or np.any(self.rates > 1.0 + self.rho):
            raise ValueError("rates must lie in [1, 1 + rho]")

    def rate_at(self, t: float) -> float:
        i = int(np.searchsorted(self.starts, t, side="right")) - 1
        return float(self.rates[max(i, 0)])

    @property
    def cumulative(self) -> np.ndarray:
        """Hardware time elapsed at each segment start."""
        widths = np.diff(self.starts)
        return np.concatenate(([0.0], np.cumsum(widths * self.rates[:-1])))


def make_drift_schedule(
    kind: DriftKind | str,
    node: int,
    n: int,
    rho: float,
    seed: int,
    horizon: float,
) -> DriftSchedule:
    if not 0 <= rho < 1:
        raise ValueError(f"rho out of range: {rho}")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    kind = DriftKind(kind)
    if kind is DriftKind.CONSTANT:
        starts, rates = [0.0], [1.0]
    elif kind is DriftKind.ALTERNATING_EXTREMES:
        starts, rates = [0.0], [1.0 + rho if node % 2 == 0 else 1.0]
    elif kind is DriftKind.RAMP_ACROSS_NODES:
        frac = node / (n - 1) if n > 1 else 0.0
        starts, rates = [0.0, horizon / 2.0], [1.0 + rho * frac, 1.0]
    else:
        count = max(1, int(np.ceil(horizon / RANDOM_WALK_PERIOD)))
        rng = np.random.default_rng([seed, node])
        starts = np.arange(count) * RANDOM_WALK_PERIOD
        rates = 1.0 + rho * rng.random(count)
    return DriftSchedule(
        kind, np.asarray(starts, dtype=float), np.asarray(rates, dtype=float), float(horizon), rho
    )


@dataclass(frozen=True)
class HardwareClock:
    owner: int
    schedule: DriftSchedule
    h0: float = 0.0

    def _check(self, t: float):
        if t < 0 or t > self.schedule.horizon:
            raise ValueError(f"time {t} outside [0, {self.schedule.horizon}]")

    def _elapsed(self, t: float) -> float:
        s = self.schedule
        i = max(int(np.searchsorted(s.starts, t, side="right")) - 1, 0)
        return float(s.cumulative[i] + s.rates[i] * (t - s.starts[i]))

    def value(self, t: float) -> float:
        self._check(t)
        return self.h0 + self._elapsed(t)

    def real_time_of(self, h: float) -> float:
        """Inverse of :meth:`value`, extrapolating the last rate past the horizon."""
        s = self.schedule
        target = h - self.h0
        if target < 0:
            raise ValueError("hardware value precedes the clock's start")
        cum = s.cumulative
        i = max(int(np.searchsorted(cum, target, side="right")) - 1, 0)
        return float(s.starts[i] + (target - cum[i]) / s.rates[i])


def hardware_interval(c: HardwareClock, t1: float, t2: float) -> float:
    if t2 < t1:
        raise ValueError(f"interval end {t2} precedes start {t1}")
    c._check(t1)
    c._check(t2)
    return c._elapsed(t2) - c._elapsed(t1)
