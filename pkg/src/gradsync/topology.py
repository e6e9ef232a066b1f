"""Network topologies, the estimate graph, and effective distances.

The estimate graph has one edge per available clock estimate. Direct edges
come from point-to-point messages over a network link; RBS edges connect two
receivers of a common relay's beacons. Each edge carries the certified
uncertainty of its estimate, and effective distances are shortest paths over
those uncertainties.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

EPS_FLOOR = 1e-9


class TopologyKind(str, Enum):
    PATH = "path"
    RING = "ring"
    GRID = "grid"
    RANDOM_GEOMETRIC = "random_geometric"


class EdgeKind(str, Enum):
    DIRECT = "direct"
    RBS = "rbs"


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class TopologySpec:
    kind: TopologyKind = TopologyKind.PATH
    n: int = 16
    radius: Optional[float] = None
    seed: Optional[int] = None
    beta_min: float = 0.0
    beta_max: float = 1.0


@dataclass(frozen=True)
class Link:
    u: int
    v: int
    beta_min: float
    beta_max: float


@dataclass(frozen=True)
class NetworkGraph:
    n: int
    links: tuple[Link, ...]
    positions: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        seen = set()
        for ln in self.links:
            if ln.u == ln.v:
                raise TopologyError(f"self-loop at node {ln.u}")
            if not (0 <= ln.u < self.n and 0 <= ln.v < self.n):
                raise TopologyError(f"link {ln.u}-{ln.v} outside [0, {self.n})")
            if not 0 <= ln.beta_min <= ln.beta_max:
                raise TopologyError(f"bad delay bounds on {ln.u}-{ln.v}")
            key = (min(ln.u, ln.v), max(ln.u, ln.v))
            if key in seen:
                raise TopologyError(f"duplicate link {key}")
            seen.add(key)

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for ln in self.links:
            adj[ln.u].append(ln.v)
            adj[ln.v].append(ln.u)
        for a in adj:
            a.sort()
        return adj

    def link_between(self, u: int, v: int) -> Link:
        key = (min(u, v), max(u, v))
        for ln in self.links:
            if (ln.u, ln.v) == key:
                return ln
        raise KeyError(key)

    def edge_pairs(self) -> set[tuple[int, int]]:
        return {(ln.u, ln.v) for ln in self.links}

    def hop_distances(self, source: int) -> list[int]:
        """BFS hop counts from ``source``; -1 marks unreachable nodes."""
        adj = self.neighbors()
        dist = [-1] * self.n
        dist[source] = 0
        queue = deque([source])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return dist

    def is_connected(self) -> bool:
        return self.n <= 1 or min(self.hop_distances(0)) >= 0


@dataclass(frozen=True)
class SystemParams:
    rho: float = 1e-4
    mu: Optional[float] = None
    ru: float = 0.01
    delta_t: float = 1.0
    delta_b: float = 1.0
    lam: float = 4.0
    rbs_enabled: bool = True
    rbs_adjacent: bool = False
    eps_floor: float = EPS_FLOOR

    def __post_init__(self):
        if not 0 <= self.rho < 1:
            raise ValueError(f"rho out of range: {self.rho}")
        if self.mu is None:
            object.__setattr__(self, "mu", max(100.0 * self.rho, 1e-3))
        if not self.mu > 0:
            raise ValueError(f"mu must be positive: {self.mu}")
        if self.ru < 0:
            raise ValueError(f"ru must be non-negative: {self.ru}")
        if not (self.delta_t > 0 and self.delta_b > 0):
            raise ValueError("delta_t and delta_b must be positive")
        if self.lam < 1:
            raise ValueError(f"lambda must be >= 1: {self.lam}")
        if not self.eps_floor > 0:
            raise ValueError("eps_floor must be positive")

    @property
    def r_max(self) -> float:
        """Largest logical clock rate in real time: fast mode on the fastest hardware."""
        return (1.0 + self.rho) * (1.0 + self.mu)

    @property
    def sigma(self) -> float:
        return self.r_max - 1.0


@dataclass(frozen=True)
class EstimateEdge:
    u: int
    v: int
    eps: float
    kind: EdgeKind
    relay: Optional[int] = None

    def __post_init__(self):
        if self.u >= self.v:
            raise TopologyError(f"estimate edge endpoints must be ordered: {self.u}, {self.v}")
        if not self.eps > 0:
            raise TopologyError(f"edge {self.u}-{self.v} has non-positive uncertainty")
        if (self.kind is EdgeKind.RBS) != (self.relay is not None):
            raise TopologyError("relay is set exactly for RBS edges")

    def other(self, node: int) -> int:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise ValueError(f"node {node} not on edge {self.u}-{self.v}")


@dataclass(frozen=True)
class EstimateGraph:
    n: int
    edges: tuple[EstimateEdge, ...]

    def __post_init__(self):
        seen = set()
        for e in self.edges:
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise TopologyError(f"edge {e.u}-{e.v} outside [0, {self.n})")
            key = (e.u, e.v, e.kind)
            if key in seen:
                raise TopologyError(f"duplicate {e.kind.value} edge {e.u}-{e.v}")
            seen.add(key)

    @property
    def eps_min(self) -> float:
        return min(e.eps for e in self.edges)

    @property
    def eps_max(self) -> float:
        return max(e.eps for e in self.edges)

    def incident(self, node: int) -> list[EstimateEdge]:
        return [e for e in self.edges if node in (e.u, e.v)]


def build_network(spec: TopologySpec, max_retries: int = 100) -> NetworkGraph:
    n = spec.n
    if n < 1:
        raise TopologyError("topology needs at least one node")
    kind = TopologyKind(spec.kind)
    pairs: list[tuple[int, int]]
    positions = None
    if kind is TopologyKind.PATH:
        pairs = [(i, i + 1) for i in range(n - 1)]
    elif kind is TopologyKind.RING:
        if n < 3:
            pairs = [(i, i + 1) for i in range(n - 1)]
        else:
            pairs = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    elif kind is TopologyKind.GRID:
        k = math.isqrt(n)
        if k * k != n:
            raise TopologyError(f"grid needs a square node count, got {n}")
        pairs = []
        for r in range(k):
            for c in range(k):
                i = r * k + c
                if c + 1 < k:
                    pairs.append((i, i + 1))
                if r + 1 < k:
                    pairs.append((i, i + k))
    else:
        if spec.radius is None or spec.radius <= 0:
            raise TopologyError("random geometric topology needs radius > 0")
        if spec.seed is None:
            raise TopologyError("random geometric topology needs a seed")
        rng = np.random.default_rng(spec.seed)
        for _ in range(max_retries):
            pts = rng.random((n, 2))
            d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
            iu, iv = np.nonzero(np.triu(d <= spec.radius, k=1))
            pairs = list(zip(iu.tolist(), iv.tolist()))
            g = _make_graph(n, pairs, spec)
            if g.is_connected():
                return NetworkGraph(n, g.links, positions=pts)
        raise TopologyError(
            f"random geometric graph (n={n}, radius={spec.radius}) "
            f"not connected after {max_retries} attempts"
        )
    return _make_graph(n, pairs, spec, positions)


def _make_graph(n, pairs, spec, positions=None) -> NetworkGraph:
    ordered = sorted((min(a, b), max(a, b)) for a, b in pairs)
    links = tuple(Link(a, b, spec.beta_min, spec.beta_max) for a, b in ordered)
    return NetworkGraph(n, links, positions)


def direct_uncertainty(beta_min: float, beta_max: float, p: SystemParams) -> float:
    """Uncertainty of a direct estimate over a link with delay in [beta_min, beta_max].

    Half the spread of the sender's logical clock at receipt, plus relative
    drift over the longest staleness window (one send period plus delivery).
    Not floored; see :func:`floored`.
    """
    r_max = p.r_max
    return (r_max * beta_max - beta_min) / 2.0 + (r_max - 1.0) * (p.delta_t + beta_max)


def rbs_uncertainty(p: SystemParams, beta_max_relay: float) -> float:
    """Uncertainty of an RBS estimate whose exchange crosses two relay links."""
    r_max = p.r_max
    return r_max * p.ru + (r_max - 1.0) * (p.delta_b + 2.0 * beta_max_relay)


def floored(eps: float, p: SystemParams) -> float:
    return max(eps, p.eps_floor)


def build_estimate_graph(g: NetworkGraph, p: SystemParams) -> EstimateGraph:
    if not g.is_connected():
        raise TopologyError("network graph is disconnected")
    edges: list[EstimateEdge] = []
    for ln in g.links:
        eps = floored(direct_uncertainty(ln.beta_min, ln.beta_max, p), p)
        edges.append(EstimateEdge(ln.u, ln.v, eps, EdgeKind.DIRECT))
    if p.rbs_enabled:
        adj = [set(a) for a in g.neighbors()]
        bmax = {}
        for ln in g.links:
            bmax[(ln.u, ln.v)] = bmax[(ln.v, ln.u)] = ln.beta_max
        for u in range(g.n):
            for w in range(u + 1, g.n):
                common = adj[u] & adj[w]
                if not common:
                    continue
                if w in adj[u] and not p.rbs_adjacent:
                    continue
                best = None
                for x in sorted(common):
                    eps = floored(rbs_uncertainty(p, max(bmax[(u, x)], bmax[(x, w)])), p)
                    if best is None or eps < best[0]:
                        best = (eps, x)
                edges.append(EstimateEdge(u, w, best[0], EdgeKind.RBS, relay=best[1]))
    edges.sort(key=lambda e: (e.u, e.v, e.kind.value))
    return EstimateGraph(g.n, tuple(edges))


def _weight_matrix(eg: EstimateGraph) -> csr_matrix:
    # parallel edges (direct + rbs on one pair) keep the smaller weight
    best: dict[tuple[int, int], float] = {}
    for e in eg.edges:
        key = (e.u, e.v)
        if key not in best or e.eps < best[key]:
            best[key] = e.eps
    if not best:
        return csr_matrix((eg.n, eg.n))
    rows, cols, vals = [], [], []
    for (a, b), w in best.items():
        rows += [a, b]
        cols += [b, a]
        vals += [w, w]
    return csr_matrix((vals, (rows, cols)), shape=(eg.n, eg.n))


def all_pairs_distances(eg: EstimateGraph) -> np.ndarray:
    """Matrix of effective distances; ``inf`` where nodes are disconnected."""
    if eg.n == 0:
        return np.zeros((0, 0))
    d = dijkstra(_weight_matrix(eg), directed=False)
    # both directions sum the same weights in a different order
    return np.minimum(d, d.T)


def effective_distance(eg: EstimateGraph, u: int, v: int) -> float:
    for x in (u, v):
        if not 0 <= x < eg.n:
            raise IndexError(f"node {x} not in [0, {eg.n})")
    if u == v:
        return 0.0
    d = dijkstra(_weight_matrix(eg), directed=False, indices=[u, v])
    return float(min(d[0, v], d[1, u]))


def effective_diameter(eg: EstimateGraph, dist: Optional[np.ndarray] = None) -> float:
    if eg.n <= 1:
        return 0.0
    if dist is None:
        dist = all_pairs_distances(eg)
    if not np.all(np.isfinite(dist)):
        raise TopologyError("estimate graph is disconnected")
    return float(dist.max())


def graph_from_weights(n: int, weighted: Iterable[tuple[int, int, float]]) -> EstimateGraph:
    """Direct-only estimate graph with arbitrary weights; handy for distance checks."""
    edges = [EstimateEdge(min(a, b), max(a, b), w, EdgeKind.DIRECT) for a, b, w in weighted]
    return EstimateGraph(n, tuple(edges))
