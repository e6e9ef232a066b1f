"""Estimate records for direct and RBS estimate edges.

A record anchors an estimate of the remote node's logical clock at one of
the reader's hardware readings, and advances it at the reader's hardware
rate. Every update keeps the read error within the edge's uncertainty.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Optional

from numba import njit

from .topology import EdgeKind, EstimateEdge, SystemParams

RECEPTION_WINDOW = 4


class EstimateError(ValueError):
    pass


class NoEstimate(EstimateError):
    """Raised when reading a record before its first update."""


@njit(cache=True)
def direct_anchor_value(payload_l, beta_min, beta_max, r_max):
    # midpoint of [payload + beta_min, payload + r_max * beta_max]
    return payload_l + (beta_min + r_max * beta_max) / 2.0


@njit(cache=True)
def advance_estimate(anchor_value, anchor_h, now_h):
    return anchor_value + (now_h - anchor_h)


@dataclass(frozen=True)
class DirectMessage:
    sender: int
    payload_l: float
    seq: int


@dataclass(frozen=True)
class Beacon:
    origin: int
    beacon_id: int


@dataclass(frozen=True)
class ReceptionRecord:
    beacon: Beacon
    local_h: float
    local_l: float


@dataclass(frozen=True)
class TimestampExchange:
    sender: int
    beacon: Beacon
    remote_l: float


@dataclass(frozen=True)
class EstimateRecord:
    reader: int
    edge: EstimateEdge
    anchor_h: Optional[float] = None
    anchor_value: Optional[float] = None
    last_seq: int = -1
    last_beacon: int = -1

    @property
    def remote(self) -> int:
        return self.edge.other(self.reader)

    @property
    def eps(self) -> float:
        return self.edge.eps

    @property
    def initialized(self) -> bool:
        return self.anchor_h is not None


def new_record(reader: int, edge: EstimateEdge) -> EstimateRecord:
    edge.other(reader)
    return EstimateRecord(reader, edge)


def on_direct_message(
    rec: EstimateRecord,
    msg: DirectMessage,
    now_h: float,
    link: tuple[float, float],
    p: SystemParams,
) -> EstimateRecord:
    if rec.edge.kind is not EdgeKind.DIRECT:
        raise EstimateError("direct message applied to a non-direct edge")
    if msg.sender != rec.remote:
        raise EstimateError(f"message from {msg.sender}, expected {rec.remote}")
    if msg.seq <= rec.last_seq:
        return rec
    beta_min, beta_max = link
    value = direct_anchor_value(msg.payload_l, beta_min, beta_max, p.r_max)
    return replace(rec, anchor_h=now_h, anchor_value=value, last_seq=msg.seq)


@dataclass
class ReceptionLog:
    """Beacon receptions of one node, keeping the newest few per origin."""

    owner: int
    neighbors: frozenset[int]
    window: int = RECEPTION_WINDOW
    _by_origin: dict[int, deque] = field(default_factory=dict)

    def records(self, origin: int) -> list[ReceptionRecord]:
        return list(self._by_origin.get(origin, ()))

    def find(self, beacon: Beacon) -> Optional[ReceptionRecord]:
        for r in self._by_origin.get(beacon.origin, ()):
            if r.beacon == beacon:
                return r
        return None


def on_beacon_reception(
    log: ReceptionLog, b: Beacon, now_h: float, now_l: float
) -> ReceptionRecord:
    if b.origin not in log.neighbors:
        raise EstimateError(f"node {log.owner} is not adjacent to beacon origin {b.origin}")
    q = log._by_origin.setdefault(b.origin, deque(maxlen=log.window))
    if any(r.beacon == b for r in q):
        raise EstimateError(f"beacon {b} already received")
    rec = ReceptionRecord(b, now_h, now_l)
    q.append(rec)
    return rec


def apply_exchange(
    rec: EstimateRecord, local: Optional[ReceptionRecord], ex: TimestampExchange
) -> EstimateRecord:
    if rec.edge.kind is not EdgeKind.RBS:
        raise EstimateError("timestamp exchange applied to a non-RBS edge")
    if ex.sender != rec.remote:
        raise EstimateError(f"exchange from {ex.sender}, expected {rec.remote}")
    if ex.beacon.origin != rec.edge.relay:
        raise EstimateError(f"beacon from {ex.beacon.origin}, edge relay is {rec.edge.relay}")
    if ex.beacon.beacon_id <= rec.last_beacon:
        return rec
    if local is None:
        raise EstimateError(f"no local reception of beacon {ex.beacon}")
    if local.beacon != ex.beacon:
        raise EstimateError(f"beacon mismatch: {local.beacon} vs {ex.beacon}")
    return replace(
        rec,
        anchor_h=local.local_h,
        anchor_value=ex.remote_l,
        last_beacon=ex.beacon.beacon_id,
    )


def read_estimate(rec: EstimateRecord, now_h: float) -> float:
    if not rec.initialized:
        raise NoEstimate(f"node {rec.reader} has no estimate of node {rec.remote} yet")
    if now_h < rec.anchor_h:
        raise EstimateError("read precedes the record's anchor")
    return advance_estimate(rec.anchor_value, rec.anchor_h, now_h)
