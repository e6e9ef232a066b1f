"""Fast/slow logical clock with per-edge thresholds.

The clock runs at hardware rate (slow) or ``1 + mu`` times hardware rate
(fast). A node goes fast at level ``s`` when some neighbor is certainly ahead
by ``(2s - 1)`` thresholds and no neighbor can be behind by more than ``2s``
thresholds, each measured in that edge's own threshold ``kappa = lam * eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .topology import EstimateGraph


class Mode(IntEnum):
    SLOW = 0
    FAST = 1


@dataclass(frozen=True)
class LogicalClockState:
    owner: int
    logical: float = 0.0
    mode: Mode = Mode.SLOW
    last_tick_h: float = 0.0


@dataclass(frozen=True)
class NeighborEstimate:
    node: int
    eps: float
    kappa: float
    value: Optional[float] = None  # None until the estimate layer has warmed up


def kappa_for_edge(eps: float, lam: float) -> float:
    return lam * eps


def skew_cap(diameter: float, kappa_max: float) -> float:
    return 4.0 * diameter + 10.0 * kappa_max


def compute_s_max(eg: EstimateGraph, diameter: float, lam: float) -> int:
    if not eg.edges:
        return 1
    kappa_min = kappa_for_edge(eg.eps_min, lam)
    kappa_max = kappa_for_edge(eg.eps_max, lam)
    return max(1, math.ceil(skew_cap(diameter, kappa_max) / kappa_min))


@njit(cache=True)
def fast_condition(l_u, est, eps, kappa, count, s_max):
    """True iff some level ``s`` in ``[1, s_max]`` satisfies both trigger clauses.

    Only the first ``count`` entries of the arrays are live neighbors.
    """
    if count == 0:
        return False
    s = 1
    while s <= s_max:
        ahead = False
        for i in range(count):
            if (est[i] - eps[i]) - l_u >= (2 * s - 1) * kappa[i]:
                ahead = True
                break
        # the lead clause only gets harder with s
        if not ahead:
            return False
        ok = True
        for i in range(count):
            if (est[i] + eps[i]) - l_u < -2 * s * kappa[i]:
                ok = False
                break
        if ok:
            return True
        s += 1
    return False


def evaluate_fast_condition(
    state: LogicalClockState, view: Sequence[NeighborEstimate], s_max: int
) -> Mode:
    live = [nb for nb in view if nb.value is not None]
    if not live:
        return Mode.SLOW
    est = np.array([nb.value for nb in live], dtype=float)
    eps = np.array([nb.eps for nb in live], dtype=float)
    kappa = np.array([nb.kappa for nb in live], dtype=float)
    fast = fast_condition(state.logical, est, eps, kappa, len(live), s_max)
    return Mode.FAST if fast else Mode.SLOW


def advance_logical_clock(
    state: LogicalClockState, delta_h: float, mode: Mode, mu: float
) -> LogicalClockState:
    if delta_h < 0:
        raise ValueError(f"negative hardware interval {delta_h}")
    if delta_h == 0:
        return state
    rate = 1.0 + mu if mode is Mode.FAST else 1.0
    return replace(
        state,
        logical=state.logical + rate * delta_h,
        mode=mode,
        last_tick_h=state.last_tick_h + delta_h,
    )
