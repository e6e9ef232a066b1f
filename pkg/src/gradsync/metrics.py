"""Skew metrics, the gradient bound check, and CSV export."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .gcs import Mode
from .simengine import Trace
from .topology import EstimateGraph, all_pairs_distances, effective_diameter

TRACE_COLUMNS = ("t", "node", "L", "H", "mode")
SKEW_COLUMNS = ("t", "global_skew")
PAIR_COLUMNS = ("u", "v", "dist", "max_skew", "ratio")


def fmt(x: float) -> str:
    return f"{x:.12g}"


@dataclass
class SkewReport:
    times: np.ndarray
    global_skew: np.ndarray  # every sample, warmup included
    warmup: float
    pairs: np.ndarray  # (k, 2) with u < v
    pair_max_skew: np.ndarray  # after warmup
    pair_dist: np.ndarray
    diameter: float
    eps_min: float
    rho: float

    @property
    def post_warmup(self) -> np.ndarray:
        return self.times >= self.warmup

    @property
    def global_skew_max(self) -> float:
        mask = self.post_warmup
        return float(self.global_skew[mask].max()) if mask.any() else 0.0

    @property
    def pair_ratio(self) -> np.ndarray:
        """Max skew per unit of effective distance."""
        return self.pair_max_skew / self.pair_dist

    @property
    def dimensionless_diameter(self) -> float:
        return self.diameter / self.eps_min if self.eps_min > 0 else 0.0


@dataclass(frozen=True)
class GradientBoundSpec:
    c_l: float = 8.0
    log_base: Optional[float] = None  # None: 1/rho
    warmup: Optional[float] = None  # None: the trace's default warmup

    def __post_init__(self):
        if not self.c_l > 0:
            raise ValueError("C_L must be positive")
        if self.log_base is not None and not self.log_base > 1:
            raise ValueError("log base must exceed 1")


@dataclass(frozen=True)
class BoundResult:
    passed: bool
    max_ratio: float
    worst_pair: Optional[tuple[int, int]]
    log_factor: float


def compute_skew_report(
    trace: Trace, eg: Optional[EstimateGraph] = None, warmup: Optional[float] = None
) -> SkewReport:
    eg = trace.estimate_graph if eg is None else eg
    if eg.n != trace.n:
        raise ValueError(f"trace has {trace.n} nodes, estimate graph has {eg.n}")
    dist = trace.distances if eg is trace.estimate_graph else all_pairs_distances(eg)
    diameter = effective_diameter(eg, dist)
    warmup = trace.warmup if warmup is None else warmup
    L = trace.logical
    global_skew = L.max(axis=1) - L.min(axis=1) if trace.n else np.zeros(len(trace.times))
    post = L[trace.times >= warmup]
    iu, iv = np.triu_indices(trace.n, k=1)
    if len(post) and len(iu):
        pair_max = np.empty(len(iu))
        # row-blocked to bound memory on long traces
        for start in range(0, len(iu), 4096):
            sl = slice(start, start + 4096)
            pair_max[sl] = np.abs(post[:, iu[sl]] - post[:, iv[sl]]).max(axis=0)
    else:
        pair_max = np.zeros(len(iu))
    return SkewReport(
        times=trace.times,
        global_skew=global_skew,
        warmup=warmup,
        pairs=np.stack([iu, iv], axis=1),
        pair_max_skew=pair_max,
        pair_dist=dist[iu, iv],
        diameter=diameter,
        eps_min=eg.eps_min if eg.edges else 0.0,
        rho=trace.scenario.params.rho,
    )


def check_gradient_bound(report: SkewReport, spec: GradientBoundSpec) -> BoundResult:
    """max skew(u,v) <= C_L * dist(u,v) * max(1, log_base(D_hat)) for every pair."""
    if len(report.pairs) == 0:
        return BoundResult(True, 0.0, None, 1.0)
    d_hat = report.dimensionless_diameter
    if d_hat < 1:
        raise ValueError(f"dimensionless diameter {d_hat} < 1; check eps_floor")
    base = spec.log_base
    if base is None:
        base = 1.0 / report.rho if report.rho > 0 else math.inf
    log_term = 0.0 if math.isinf(base) else math.log(d_hat) / math.log(base)
    factor = max(1.0, log_term)
    ratios = report.pair_max_skew / (report.pair_dist * factor)
    worst = int(np.argmax(ratios))
    max_ratio = float(ratios[worst])
    u, v = report.pairs[worst]
    return BoundResult(max_ratio <= spec.c_l, max_ratio, (int(u), int(v)), factor)


def _write(path: Path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def export_trace_csv(trace: Trace, path) -> None:
    rows = (
        (fmt(t), u, fmt(l), fmt(h), mode.name.lower()) for t, u, l, h, mode in trace.rows()
    )
    _write(path, TRACE_COLUMNS, rows)


def export_skew_csv(report: SkewReport, path) -> None:
    rows = ((fmt(t), fmt(s)) for t, s in zip(report.times, report.global_skew))
    _write(path, SKEW_COLUMNS, rows)


def export_pairs_csv(report: SkewReport, path) -> None:
    rows = (
        (int(u), int(v), fmt(d), fmt(s), fmt(s / d))
        for (u, v), d, s in zip(report.pairs, report.pair_dist, report.pair_max_skew)
    )
    _write(path, PAIR_COLUMNS, rows)


def read_trace_csv(path) -> list[tuple[float, int, float, float, Mode]]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header {header}")
        return [
            (float(t), int(u), float(l), float(h), Mode[m.upper()]) for t, u, l, h, m in r
        ]
