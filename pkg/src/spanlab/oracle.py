"""Ground-truth machinery: greedy baseline, exact stretch verification, and
sparsity/lightness metrics.

Deliberately self-contained: this module re-implements its own Dijkstra
and a Prim-style MST so that nothing it certifies depends on the code
paths under test.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

from .graphs import WeightedGraph
from .spanner import Spanner, graph_hash

INF = math.inf


def _dijkstra(n: int, adj: list[list[tuple[int, float]]], source: int) -> list[float]:
    dist = [INF] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _adjacency(n: int, edges: list[tuple[int, int, float]]) -> list[list[tuple[int, float]]]:
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for u, v, w in edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    return adj


def _prim_mst_weight(g: WeightedGraph) -> float:
    """MST weight via Prim; raises on disconnected input."""
    if g.n == 0:
        return 0.0
    adj = _adjacency(g.n, g.edges)
    in_tree = [False] * g.n
    total = 0.0
    count = 0
    heap: list[tuple[float, int]] = [(0.0, 0)]
    while heap:
        w, u = heapq.heappop(heap)
        if in_tree[u]:
            continue
        in_tree[u] = True
        total += w
        count += 1
        for v, wv in adj[u]:
            if not in_tree[v]:
                heapq.heappush(heap, (wv, v))
    if count != g.n:
        raise ValueError("metrics need a connected graph")
    return total


# ---------------------------------------------------------------- greedy


def greedy_spanner(g: WeightedGraph, t: float) -> Spanner:
    """Classic greedy: scan edges by nondecreasing weight (ties by edge id);
    keep an edge iff the spanner built so far has detour > t * w."""
    if t < 1.0:
        raise ValueError("t must be >= 1")
    adj: list[list[tuple[int, float]]] = [[] for _ in range(g.n)]
    kept: list[tuple[int, int, float]] = []
    order = sorted(range(g.m), key=lambda e: (g.edges[e][2], e))
    for eid in order:
        u, v, w = g.edges[eid]
        d = _dijkstra_bounded(adj, u, v, t * w)
        if d > t * w:
            kept.append((u, v, w))
            adj[u].append((v, w))
            adj[v].append((u, w))
    return Spanner(
        algo="greedy", k=0, eps=0.0, n=g.n, edges=kept, source_hash=graph_hash(g)
    )


def _dijkstra_bounded(adj: list[list[tuple[int, float]]], source: int,
                      target: int, cutoff: float) -> float:
    """Distance source->target, abandoning paths longer than cutoff."""
    dist = {source: 0.0}
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u == target:
            return d
        if d > dist.get(u, INF) or d > cutoff:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd <= cutoff and nd < dist.get(v, INF):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist.get(target, INF)


# ---------------------------------------------------------------- verify


@dataclass
class StretchReport:
    max_stretch: float
    witness: tuple[int, int, float] | None
    ok: bool
    target: float
    histogram: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        wit = list(self.witness) if self.witness else None
        return json.dumps(
            {
                "max_stretch": self.max_stretch,
                "witness": wit,
                "pass": self.ok,
                "target": self.target,
                "histogram_buckets": self.histogram,
            }
        )


def verify_stretch(g: WeightedGraph, h: Spanner | WeightedGraph, t: float) -> StretchReport:
    """Exact per-edge stretch of h over g.

    The maximum of d_H(u,v)/w(u,v) over edges of g equals the stretch over
    all vertex pairs: any shortest g-path is a chain of edges, each
    stretched at most that much.  Pass iff max <= t*(1+1e-9).
    """
    h_edges = h.edges if isinstance(h, Spanner) else h.edges
    submap: dict[tuple[int, int], float] = {}
    for u, v, w in g.edges:
        key = (u, v) if u < v else (v, u)
        submap[key] = w
    for u, v, w in h_edges:
        key = (u, v) if u < v else (v, u)
        if key not in submap or submap[key] != w:
            raise ValueError(f"spanner edge {key} (w={w}) is not an edge of the graph")

    adj_h = _adjacency(g.n, list(h_edges))
    dist_from: dict[int, list[float]] = {}
    max_stretch = 1.0 if g.m else 0.0
    witness = None
    ratios: list[float] = []
    for u, v, w in g.edges:
        src = u if u in dist_from or v not in dist_from else v
        if src not in dist_from:
            dist_from[src] = _dijkstra(g.n, adj_h, src)
        other = v if src == u else u
        d = dist_from[src][other]
        ratio = d / w
        ratios.append(ratio)
        if ratio > max_stretch:
            max_stretch = ratio
            witness = (u, v, w)
    hist: dict[str, int] = {}
    for r in ratios:
        if math.isinf(r):
            key = "inf"
        else:
            key = f"{math.floor(r * 4) / 4:.2f}"
        hist[key] = hist.get(key, 0) + 1
    ok = max_stretch <= t * (1.0 + 1e-9)
    return StretchReport(
        max_stretch=max_stretch, witness=witness, ok=ok, target=t, histogram=hist
    )


# ---------------------------------------------------------------- metrics


@dataclass
class QualityMetrics:
    edges: int
    weight: float
    sparsity: float
    lightness: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "edges": self.edges,
                "weight": self.weight,
                "sparsity": self.sparsity,
                "lightness": self.lightness,
            }
        )


def spanner_metrics(g: WeightedGraph, h: Spanner | WeightedGraph) -> QualityMetrics:
    h_edges = h.edges if isinstance(h, Spanner) else h.edges
    mst_w = _prim_mst_weight(g)
    hw = sum(w for _, _, w in h_edges)
    denom = max(g.n - 1, 1)
    return QualityMetrics(
        edges=len(h_edges),
        weight=hw,
        sparsity=len(h_edges) / denom,
        lightness=hw / mst_w if mst_w > 0 else INF,
    )
