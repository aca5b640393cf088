"""Weighted graph container, file I/O, MST, shortest paths, normalization.

Everything downstream (bucketing, the spanner builders, the verifier)
consumes the types in this module.  Graphs are simple and undirected with
strictly positive weights; ingestion collapses multi-edges to the lightest
copy and drops self-loops, keeping counters for both.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

INF = math.inf


class GraphFormatError(ValueError):
    """Raised on malformed input files; carries the offending line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# ---------------------------------------------------------------- graphs


class WeightedGraph:
    """Simple undirected graph; vertex ids in [0, n), weights > 0.

    Read-only after construction (adjacency caches are built on first use
    and never mutated afterwards), so instances can be shared freely
    across concurrent readers.
    """

    def __init__(self, n: int, edges: list[tuple[int, int, float]]):
        self.n = n
        self.edges = edges
        self.collapsed_count = 0
        self.selfloop_count = 0
        self._adj: Optional[list[list[tuple[int, float]]]] = None
        self._adj_ids: Optional[list[list[tuple[int, int]]]] = None

    @classmethod
    def from_edges(cls, n: int, raw: Iterable[tuple[int, int, float]]) -> "WeightedGraph":
        """Build a simple graph: drop self-loops, keep lightest parallel copy."""
        best: dict[tuple[int, int], float] = {}
        selfloops = 0
        collapsed = 0
        for u, v, w in raw:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"vertex id out of range: ({u}, {v}) with n={n}")
            if w <= 0:
                raise ValueError(f"nonpositive weight {w} on edge ({u}, {v})")
            if u == v:
                selfloops += 1
                continue
            key = (u, v) if u < v else (v, u)
            if key in best:
                collapsed += 1
                if w < best[key]:
                    best[key] = w
            else:
                best[key] = w
        g = cls(n, [(u, v, w) for (u, v), w in sorted(best.items())])
        g.collapsed_count = collapsed
        g.selfloop_count = selfloops
        return g

    @property
    def m(self) -> int:
        return len(self.edges)

    def weight(self) -> float:
        return sum(w for _, _, w in self.edges)

    def adjacency(self) -> list[list[tuple[int, float]]]:
        """(neighbor, weight) lists, built once on demand."""
        if self._adj is None:
            adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
            for u, v, w in self.edges:
                adj[u].append((v, w))
                adj[v].append((u, w))
            self._adj = adj
        return self._adj

    def adjacency_ids(self) -> list[list[tuple[int, int]]]:
        """(neighbor, edge index) lists."""
        if self._adj_ids is None:
            adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
            for eid, (u, v, _) in enumerate(self.edges):
                adj[u].append((v, eid))
                adj[v].append((u, eid))
            self._adj_ids = adj
        return self._adj_ids

    def edge_key_set(self) -> set[tuple[int, int]]:
        return {(u, v) if u < v else (v, u) for u, v, _ in self.edges}

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m})"


@dataclass
class MstResult:
    """Rooted minimum spanning tree with the deterministic tie-break applied."""

    parent: list[int]              # parent[root] == -1
    edges: list[tuple[int, int, float]]
    weight: float
    root: int = 0

    def parent_weight(self) -> list[float]:
        w = [0.0] * len(self.parent)
        for u, v, wt in self.edges:
            child = u if self.parent[u] == v else v
            w[child] = wt
        return w


@dataclass
class DistanceMap:
    source: int
    dist: list[float] = field(default_factory=list)

    def __getitem__(self, v: int) -> float:
        return self.dist[v]


# ---------------------------------------------------------------- file I/O


def _parse_edge_list(lines: list[str]) -> tuple[int, list[tuple[int, int, float]]]:
    header = None
    raw: list[tuple[int, int, float]] = []
    expected_m = None
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if header is None:
            if len(parts) != 2:
                raise GraphFormatError("expected header 'n m'", lineno)
            try:
                header = int(parts[0])
                expected_m = int(parts[1])
            except ValueError:
                raise GraphFormatError("non-integer header fields", lineno) from None
            continue
        if len(parts) != 3:
            raise GraphFormatError("expected 'u v w'", lineno)
        try:
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphFormatError(f"cannot parse edge {text!r}", lineno) from None
        raw.append((u, v, w))
    if header is None:
        raise GraphFormatError("empty file, missing header")
    if expected_m is not None and expected_m != len(raw):
        raise GraphFormatError(f"header announced {expected_m} edges, found {len(raw)}")
    return header, raw


def _parse_dimacs_gr(lines: list[str]) -> tuple[int, list[tuple[int, int, float]]]:
    n = None
    raw: list[tuple[int, int, float]] = []
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("c"):
            continue
        parts = text.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "sp":
                raise GraphFormatError("expected 'p sp n m'", lineno)
            n = int(parts[2])
        elif parts[0] == "a":
            if n is None:
                raise GraphFormatError("arc before problem line", lineno)
            if len(parts) != 4:
                raise GraphFormatError("expected 'a u v w'", lineno)
            try:
                u, v, w = int(parts[1]) - 1, int(parts[2]) - 1, float(parts[3])
            except ValueError:
                raise GraphFormatError(f"cannot parse arc {text!r}", lineno) from None
            raw.append((u, v, w))
        else:
            raise GraphFormatError(f"unknown record type {parts[0]!r}", lineno)
    if n is None:
        raise GraphFormatError("missing 'p sp' problem line")
    return n, raw


def load_graph(path: str, fmt: str = "edge-list") -> WeightedGraph:
    """Load a graph file.  Formats: 'edge-list' (header 'n m', lines 'u v w',
    0-based) or 'dimacs-gr' ('p sp n m' header, 'a u v w' arcs, 1-based,
    arcs treated as undirected)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if fmt == "edge-list":
        n, raw = _parse_edge_list(lines)
    elif fmt == "dimacs-gr":
        n, raw = _parse_dimacs_gr(lines)
    else:
        raise ValueError(f"unknown graph format {fmt!r}")
    return WeightedGraph.from_edges(n, raw)


def save_graph(g: WeightedGraph, path: str, header_comment: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write(f"{g.n} {g.m}\n")
        for u, v, w in g.edges:
            fh.write(f"{u} {v} {w!r}\n")


# ---------------------------------------------------------------- components


def connected_components(g: WeightedGraph) -> list[list[int]]:
    adj = g.adjacency()
    seen = [False] * g.n
    comps: list[list[int]] = []
    for s in range(g.n):
        if seen[s]:
            continue
        comp = [s]
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for v, _ in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    stack.append(v)
        comps.append(comp)
    return comps


def induced_subgraph(g: WeightedGraph, vertices: list[int]) -> tuple[WeightedGraph, list[int]]:
    """Subgraph on `vertices` with ids compacted; returns (subgraph, old ids)."""
    index = {v: i for i, v in enumerate(vertices)}
    edges = [
        (index[u], index[v], w)
        for u, v, w in g.edges
        if u in index and v in index
    ]
    sub = WeightedGraph(len(vertices), edges)
    return sub, list(vertices)


# ---------------------------------------------------------------- MST

# Kruskal with the fixed tie-break (w, min endpoint, max endpoint); this
# makes the MST unique and reproducible across runs.


class _KruskalUF:
    __slots__ = ("parent", "rank")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def minimum_spanning_tree(g: WeightedGraph) -> MstResult:
    """Unique MST under the (w, min(u,v), max(u,v)) order, rooted at vertex 0.

    Raises ValueError naming witnesses from two components if g is
    disconnected.
    """
    order = sorted(
        g.edges, key=lambda e: (e[2], min(e[0], e[1]), max(e[0], e[1]))
    )
    uf = _KruskalUF(g.n)
    tree_edges: list[tuple[int, int, float]] = []
    for u, v, w in order:
        if uf.union(u, v):
            tree_edges.append((u, v, w))
            if len(tree_edges) == g.n - 1:
                break
    if len(tree_edges) != g.n - 1 and g.n > 0:
        comps = connected_components(g)
        a, b = comps[0][0], comps[1][0]
        raise ValueError(
            f"graph is disconnected: vertices {a} and {b} lie in different components"
        )

    adj: list[list[tuple[int, float]]] = [[] for _ in range(g.n)]
    for u, v, w in tree_edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    parent = [-1] * g.n
    root = 0
    seen = [False] * max(g.n, 1)
    if g.n > 0:
        seen[root] = True
        stack = [root]
        while stack:
            u = stack.pop()
            for v, _ in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    parent[v] = u
                    stack.append(v)
    return MstResult(parent=parent, edges=tree_edges, weight=sum(w for _, _, w in tree_edges), root=root)


# ---------------------------------------------------------------- distances


def sssp_distances(g: WeightedGraph, source: int) -> DistanceMap:
    """Exact Dijkstra distances; unreachable vertices get +inf."""
    if not (0 <= source < g.n):
        raise ValueError(f"source {source} out of range for n={g.n}")
    adj = g.adjacency()
    dist = [INF] * g.n
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
    return DistanceMap(source=source, dist=dist)


def tree_path_max_weight(mst: MstResult, u: int, v: int) -> float:
    """Max edge weight on the tree path u..v (naive walk; test helper)."""
    pw = mst.parent_weight()
    depth = [0] * len(mst.parent)
    order = []
    children: list[list[int]] = [[] for _ in mst.parent]
    for x, p in enumerate(mst.parent):
        if p >= 0:
            children[p].append(x)
    stack = [mst.root]
    while stack:
        x = stack.pop()
        order.append(x)
        for c in children[x]:
            depth[c] = depth[x] + 1
            stack.append(c)
    best = 0.0
    while u != v:
        if depth[u] < depth[v]:
            u, v = v, u
        best = max(best, pw[u])
        u = mst.parent[u]
    return best


# ---------------------------------------------------------------- scaling


def normalize_weights(g: WeightedGraph) -> tuple[WeightedGraph, float]:
    """Divide every weight by the minimum weight; returns (graph, scale).

    The result has minimum weight exactly 1 (the minimum edge divides to
    w/w == 1.0 without round-off).
    """
    if g.m == 0:
        raise ValueError("cannot normalize a graph with no edges")
    scale = min(w for _, _, w in g.edges)
    scaled = WeightedGraph(g.n, [(u, v, w / scale) for u, v, w in g.edges])
    scaled.collapsed_count = g.collapsed_count
    scaled.selfloop_count = g.selfloop_count
    return scaled, scale
