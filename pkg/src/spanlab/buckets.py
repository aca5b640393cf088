"""Geometric weight classes: one grid T_j = base*(1+eps)^j, split into
mu = ceil(log_{1+eps}(1/eps)) interleaved classes.

An edge with weight w lands in the unique half-open cell (T_{j-1}, T_j]
(ties at T_j stay at j), and carries class coordinates
sigma = j mod mu, level i = j // mu.  Within one (sigma, i) cell the
max/min weight ratio is <= 1+eps; consecutive non-empty levels of the same
class are >= 1/eps apart, because (1+eps)^mu >= 1/eps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graphs import MstResult, WeightedGraph


def mu_classes(eps: float) -> int:
    """Number of interleaved classes; ceiling keeps the 1/eps separation."""
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    raw = math.log(1.0 / eps) / math.log1p(eps)
    return max(1, math.ceil(raw - 1e-12))


def threshold(j: int, eps: float, base: float = 1.0) -> float:
    return base * (1.0 + eps) ** j


def bucket_raw_index(w: float, eps: float, base: float = 1.0) -> int:
    """The unique j >= 0 with w in (T_{j-1}, T_j]; exact float comparisons."""
    if w <= 0:
        raise ValueError("weights must be positive")
    if w < base / (1.0 + eps):
        raise ValueError(f"weight {w} below bucket range (base {base})")
    j = max(0, math.ceil(math.log(w / base) / math.log1p(eps)))
    while j > 0 and threshold(j - 1, eps, base) >= w:
        j -= 1
    while threshold(j, eps, base) < w:
        j += 1
    return j


def bucket_index(w: float, eps: float, base: float = 1.0) -> tuple[int, int]:
    """(sigma, i) coordinates of weight w on the (eps, base) grid."""
    mu = mu_classes(eps)
    j = bucket_raw_index(w, eps, base)
    return j % mu, j // mu


def level_scale(sigma: int, i: int, eps: float, base: float = 1.0) -> float:
    """Upper weight threshold L_i of cell (sigma, i); L_{-1} is 0."""
    if i < 0:
        return 0.0
    mu = mu_classes(eps)
    return threshold(i * mu + sigma, eps, base)


@dataclass
class LevelBuckets:
    """Sparse per-(sigma, i) edge partition of a graph's edge list."""

    eps: float
    base: float
    mu: int
    by_class: dict[int, dict[int, list[int]]] = field(default_factory=dict)

    def classes(self) -> list[int]:
        return sorted(self.by_class)

    def levels(self, sigma: int) -> list[int]:
        return sorted(self.by_class.get(sigma, {}))

    def edges(self, sigma: int, i: int) -> list[int]:
        return self.by_class.get(sigma, {}).get(i, [])

    def total(self) -> int:
        return sum(
            len(ids) for levels in self.by_class.values() for ids in levels.values()
        )

    def scale(self, sigma: int, i: int) -> float:
        return level_scale(sigma, i, self.eps, self.base)

    def dump_csv(self, graph: WeightedGraph) -> str:
        """Debug dump: 'sigma,i,count,minw,maxw' rows."""
        rows = ["sigma,i,count,minw,maxw"]
        for sigma in self.classes():
            for i in self.levels(sigma):
                ws = [graph.edges[e][2] for e in self.edges(sigma, i)]
                rows.append(f"{sigma},{i},{len(ws)},{min(ws)!r},{max(ws)!r}")
        return "\n".join(rows) + "\n"


def partition_edges(g: WeightedGraph, eps: float, base: float = 1.0) -> LevelBuckets:
    """Partition every edge into its (sigma, i) cell; levels stored sorted."""
    mu = mu_classes(eps)
    buckets = LevelBuckets(eps=eps, base=base, mu=mu)
    for eid, (_, _, w) in enumerate(g.edges):
        j = bucket_raw_index(w, eps, base)
        sigma, i = j % mu, j // mu
        buckets.by_class.setdefault(sigma, {}).setdefault(i, []).append(eid)
    return buckets


def mst_edge_levels(mst: MstResult, eps: float, base: float = 1.0,
                    sigma: int = 0) -> dict[int, list[tuple[int, int, float]]]:
    """Level lists B_i of MST edges on class sigma's sub-grid: B_i holds the
    edges with L_{i-1} < w <= L_i (L_{-1} = 0, so level 0 catches everything
    at or below L_0)."""
    mu = mu_classes(eps)
    out: dict[int, list[tuple[int, int, float]]] = {}
    for u, v, w in mst.edges:
        j = bucket_raw_index(w, eps, base)
        i = 0 if j <= sigma else -((sigma - j) // mu)  # ceil((j - sigma) / mu)
        out.setdefault(i, []).append((u, v, w))
    return out
