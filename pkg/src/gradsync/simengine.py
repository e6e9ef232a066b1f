"""Deterministic discrete-event simulation of the estimate layer and GCS.

:func:`run_scenario` builds the topology, estimate graph and drift schedules,
flattens them into arrays, and hands them to the compiled event loop in
:mod:`gradsync._kernel`. The loop processes events in ``(time, seq)`` order,
so a scenario fully determines its trace.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional

import numpy as np

from . import _kernel as K
from .clocks import DriftKind, make_drift_schedule
from .gcs import Mode, compute_s_max, kappa_for_edge
from .topology import (
    EdgeKind,
    EstimateGraph,
    Link,
    NetworkGraph,
    SystemParams,
    TopologyKind,
    TopologySpec,
    all_pairs_distances,
    build_estimate_graph,
    build_network,
    effective_diameter,
)

log = logging.getLogger(__name__)

FLOAT_TOL = 1e-9


class DelayKind(str, Enum):
    FIXED_MAX = "fixed_max"
    FIXED_MIN = "fixed_min"
    SEEDED_UNIFORM = "seeded_uniform"
    ALTERNATING_EXTREMES = "alternating_extremes"


_DELAY_CODES = {
    DelayKind.FIXED_MAX: K.DELAY_FIXED_MAX,
    DelayKind.FIXED_MIN: K.DELAY_FIXED_MIN,
    DelayKind.SEEDED_UNIFORM: K.DELAY_SEEDED_UNIFORM,
    DelayKind.ALTERNATING_EXTREMES: K.DELAY_ALTERNATING,
}


@dataclass(frozen=True)
class DelayPolicy:
    kind: DelayKind = DelayKind.SEEDED_UNIFORM
    seed: int = 0


def link_key(link: Link) -> int:
    return link.u * 1_000_003 + link.v


def assign_delay(policy: DelayPolicy, link: Link, msg_index: int) -> float:
    return float(
        K.delay_value(
            _DELAY_CODES[DelayKind(policy.kind)],
            policy.seed,
            link_key(link),
            msg_index,
            link.beta_min,
            link.beta_max,
        )
    )


@dataclass(frozen=True)
class Scenario:
    topology: TopologySpec = field(default_factory=TopologySpec)
    params: SystemParams = field(default_factory=SystemParams)
    drift: DriftKind = DriftKind.CONSTANT
    delay: DelayKind = DelayKind.SEEDED_UNIFORM
    duration: float = 1000.0
    sample_period: float = 1.0
    seed: int = 0
    tick: float = 0.01
    loss_prob: float = 0.0
    max_events: int = 500_000_000
    eager_ticks: bool = False

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")
        if not self.tick > 0:
            raise ValueError("tick must be positive")
        if not 0 <= self.loss_prob < 1:
            raise ValueError("loss_prob must lie in [0, 1)")
        object.__setattr__(self, "drift", DriftKind(self.drift))
        object.__setattr__(self, "delay", DelayKind(self.delay))

    @property
    def n_samples(self) -> int:
        return int(math.floor(self.duration / self.sample_period + 1e-9)) + 1

    def topology_spec(self) -> TopologySpec:
        spec = self.topology
        if spec.kind is TopologyKind.RANDOM_GEOMETRIC and spec.seed is None:
            spec = replace(spec, seed=self.seed)
        return spec

    def delay_policy(self) -> DelayPolicy:
        return DelayPolicy(self.delay, self.seed)


def default_warmup(p: SystemParams, beta_max: float) -> float:
    return 2 * p.delta_t + 2 * p.delta_b + 4 * beta_max


@dataclass
class Trace:
    scenario: Scenario
    network: NetworkGraph
    estimate_graph: EstimateGraph
    distances: np.ndarray
    diameter: float
    times: np.ndarray
    logical: np.ndarray  # (samples, nodes)
    hardware: np.ndarray
    modes: np.ndarray
    stats: dict[str, float]
    s_max: int
    warmup: float

    @property
    def n(self) -> int:
        return self.network.n

    def rows(self) -> Iterator[tuple[float, int, float, float, Mode]]:
        for i, t in enumerate(self.times):
            for u in range(self.n):
                yield float(t), u, float(self.logical[i, u]), float(self.hardware[i, u]), Mode(
                    int(self.modes[i, u])
                )


_COUNT_NAMES = {
    K.C_EVENTS: "events",
    K.C_DIRECT_SENT: "direct_sent",
    K.C_DIRECT_DELIVERED: "direct_delivered",
    K.C_DIRECT_STALE: "direct_stale",
    K.C_EXCH_SENT: "exchanges_sent",
    K.C_EXCH_APPLIED: "exchanges_applied",
    K.C_EXCH_STALE: "exchanges_stale",
    K.C_EXCH_HELD: "exchanges_held",
    K.C_EXCH_DROPPED: "exchanges_dropped",
    K.C_SOUND_CHECKS: "soundness_checks",
    K.C_SOUND_VIOL: "soundness_violations",
    K.C_VALID_VIOL: "validity_violations",
    K.C_VALID_CHECKS: "validity_checks",
    K.C_STALE_VIOL: "staleness_violations",
    K.C_FAST_ENTRIES: "fast_entries",
    K.C_FAST_ENTRIES_WARM: "fast_entries_after_warmup",
    K.C_FAST_TICKS_WARM: "fast_ticks_after_warmup",
    K.C_TICKS: "ticks",
    K.C_BEACONS: "beacons",
    K.C_RECEPTIONS: "beacon_receptions",
    K.C_LOST: "lost",
    K.C_INFLIGHT_DIRECT: "direct_in_flight",
    K.C_INFLIGHT_EXCH: "exchanges_in_flight",
    K.C_HELD_APPLIED: "held_exchanges_applied",
}
_FLOAT_NAMES = {
    K.F_MAX_ERR_RATIO: "max_error_ratio",
    K.F_MAX_STALENESS_RATIO: "max_staleness_ratio",
    K.F_MAX_RATE_DEV: "max_rate_deviation",
}


def _csr(groups: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(groups) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(g) for g in groups])
    idx = np.array([x for g in groups for x in g], dtype=np.int64)
    return ptr, idx


class ScenarioError(RuntimeError):
    pass


def run_scenario(sc: Scenario) -> Trace:
    p = sc.params
    g = build_network(sc.topology_spec())
    eg = build_estimate_graph(g, p)
    dist = all_pairs_distances(eg)
    diameter = effective_diameter(eg, dist)
    s_max = compute_s_max(eg, diameter, p.lam)
    n = g.n
    beta_max = max((ln.beta_max for ln in g.links), default=0.0)
    warmup = default_warmup(p, beta_max)

    # hardware clocks
    schedules = [
        make_drift_schedule(sc.drift, u, n, p.rho, sc.seed, sc.duration) for u in range(n)
    ]
    width = max(len(s.starts) for s in schedules)
    seg_start = np.full((n, width), np.inf)
    seg_rate = np.ones((n, width))
    seg_cum = np.full((n, width), np.inf)
    nseg = np.zeros(n, dtype=np.int64)
    for u, s in enumerate(schedules):
        m = len(s.starts)
        seg_start[u, :m] = s.starts
        seg_rate[u, :m] = s.rates
        seg_cum[u, :m] = s.cumulative
        nseg[u] = m

    # links and slots; slot j = (origin x, receiver adj_node[j])
    links = list(g.links)
    link_id = {(ln.u, ln.v): i for i, ln in enumerate(links)}

    def lid(a: int, b: int) -> int:
        return link_id[(min(a, b), max(a, b))]

    adj = g.neighbors()
    adj_ptr, adj_node = _csr(adj)
    adj_link = np.array([lid(x, v) for x in range(n) for v in adj[x]], dtype=np.int64)
    slot_of = {(x, v): j for x in range(n) for j, v in zip(range(adj_ptr[x], adj_ptr[x + 1]), adj[x])}

    # one record per (reader, estimate edge)
    records = []
    for e in eg.edges:
        records.append((e.u, e))
        records.append((e.v, e))
    n_rec = len(records)
    rec_reader = np.empty(n_rec, dtype=np.int64)
    rec_remote = np.empty(n_rec, dtype=np.int64)
    rec_kind = np.empty(n_rec, dtype=np.int64)
    rec_eps = np.empty(n_rec)
    rec_kappa = np.empty(n_rec)
    rec_link = np.full(n_rec, -1, dtype=np.int64)
    rec_recv_slot = np.full(n_rec, -1, dtype=np.int64)
    rec_hop1 = np.full(n_rec, -1, dtype=np.int64)
    rec_hop2 = np.full(n_rec, -1, dtype=np.int64)
    rec_stale_bound = np.empty(n_rec)
    slot_direct_rec = np.full(len(adj_node), -1, dtype=np.int64)
    node_recs: list[list[int]] = [[] for _ in range(n)]
    xsend: list[list[int]] = [[] for _ in range(len(adj_node))]
    xrecv: list[list[int]] = [[] for _ in range(len(adj_node))]
    for r, (reader, e) in enumerate(records):
        remote = e.other(reader)
        rec_reader[r] = reader
        rec_remote[r] = remote
        rec_eps[r] = e.eps
        rec_kappa[r] = kappa_for_edge(e.eps, p.lam)
        node_recs[reader].append(r)
        if e.kind is EdgeKind.DIRECT:
            rec_kind[r] = 0
            ln = lid(reader, remote)
            rec_link[r] = ln
            slot_direct_rec[slot_of[(remote, reader)]] = r
            rec_stale_bound[r] = p.delta_t + links[ln].beta_max
        else:
            x = e.relay
            rec_kind[r] = 1
            rec_hop1[r] = lid(remote, x)
            rec_hop2[r] = lid(x, reader)
            rec_recv_slot[r] = slot_of[(x, reader)]
            xsend[slot_of[(x, remote)]].append(r)
            xrecv[slot_of[(x, reader)]].append(r)
            hop_bmax = max(links[rec_hop1[r]].beta_max, links[rec_hop2[r]].beta_max)
            rec_stale_bound[r] = p.delta_b + 2 * hop_bmax + p.ru
    node_rec_ptr, node_rec_idx = _csr(node_recs)
    xsend_ptr, xsend_idx = _csr(xsend)
    xrecv_ptr, xrecv_idx = _csr(xrecv)

    ns = sc.n_samples
    out_l = np.zeros((ns, n))
    out_h = np.zeros((ns, n))
    out_mode = np.zeros((ns, n), dtype=np.int8)

    counts, floats = K.run_kernel(
        n, float(sc.duration), float(sc.sample_period), ns, float(sc.tick), float(p.mu),
        float(p.r_max), float(p.ru), float(p.delta_t), float(p.delta_b),
        int(sc.seed), _DELAY_CODES[sc.delay], float(sc.loss_prob), float(warmup),
        int(sc.max_events), int(s_max), FLOAT_TOL, bool(sc.eager_ticks),
        seg_start, seg_rate, seg_cum, nseg,
        np.array([ln.beta_min for ln in links], dtype=float),
        np.array([ln.beta_max for ln in links], dtype=float),
        np.array([link_key(ln) for ln in links], dtype=np.int64),
        adj_ptr, adj_node, adj_link, slot_direct_rec,
        rec_reader, rec_remote, rec_kind, rec_eps, rec_kappa, rec_link,
        rec_recv_slot, rec_hop1, rec_hop2, rec_stale_bound,
        node_rec_ptr, node_rec_idx,
        xsend_ptr, xsend_idx, xrecv_ptr, xrecv_idx,
        out_l, out_h, out_mode,
    )
    if counts[K.C_STATUS] != 0:
        raise ScenarioError(f"event cap of {sc.max_events} exceeded; runaway schedule?")
    stats: dict[str, float] = {name: int(counts[i]) for i, name in _COUNT_NAMES.items()}
    stats.update({name: float(floats[i]) for i, name in _FLOAT_NAMES.items()})
    log.debug("scenario done: %s", stats)
    times = np.arange(ns) * sc.sample_period
    return Trace(
        scenario=sc,
        network=g,
        estimate_graph=eg,
        distances=dist,
        diameter=diameter,
        times=times,
        logical=out_l,
        hardware=out_h,
        modes=out_mode,
        stats=stats,
        s_max=s_max,
        warmup=warmup,
    )
