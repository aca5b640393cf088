"""Level framework over MST-subtree clusters and the static-tree union-find.

Same representative-graph / inner-spanner scheme as pm.py, but every
cluster induces a connected MST subtree, so all merges are Link(v)
operations along the MST, pre-declared as the union tree.  The whole MST
enters the spanner up front.  Carried forest edges (inter-cluster MST
edges of weight <= L_i) are exactly the level's merge candidates: the MST
cycle property guarantees they reach every cluster touched by bucket
edges.
"""
from __future__ import annotations

from typing import Callable, Optional

from .buckets import bucket_raw_index, level_scale, mu_classes, partition_edges
from .dsu import StaticTreeIndex, StaticTreeUF
from .graphs import (
    WeightedGraph,
    connected_components,
    induced_subgraph,
    minimum_spanning_tree,
    normalize_weights,
)
from .hz import UnweightedGraph, hz_spanner
from .pm import G_PM, grow_star_cover, internal_eps, dedupe_source_edges
from .spanner import Spanner, graph_hash


def build_linear(
    g: WeightedGraph,
    k: int,
    eps: float,
    nominal_eps: bool = False,
    instrument: bool = False,
    check: Optional[Callable[[str, bool, str], None]] = None,
    uf_mode: str = "tables",
) -> Spanner:
    """MST-containing (2k-1)(1+eps)-spanner; disconnected inputs are built
    per component."""
    if k < 1:
        raise ValueError("k must be >= 1")
    comps = connected_components(g)
    if len(comps) <= 1:
        return _build_connected(g, k, eps, nominal_eps, instrument, check, uf_mode)
    edges: list[tuple[int, int, float]] = []
    levels: list[dict] = []
    ops = {"links": 0, "finds": 0, "uf_cost": 0, "hz": 0}
    for comp in comps:
        sub, back = induced_subgraph(g, sorted(comp))
        part = _build_connected(sub, k, eps, nominal_eps, instrument, check, uf_mode)
        edges.extend((back[u], back[v], w) for u, v, w in part.edges)
        levels.extend(part.levels)
        for key in ops:
            ops[key] += part.ops.get(key, 0)
    edges.sort()
    return Spanner(
        algo="linear", k=k, eps=eps, n=g.n, edges=edges,
        source_hash=graph_hash(g), levels=levels, ops=ops,
    )


def _build_connected(
    g: WeightedGraph,
    k: int,
    eps: float,
    nominal_eps: bool,
    instrument: bool,
    check: Optional[Callable[[str, bool, str], None]],
    uf_mode: str,
) -> Spanner:
    eps_i = internal_eps(eps, nominal_eps)
    ops = {"links": 0, "finds": 0, "uf_cost": 0, "hz": 0}
    if g.m == 0:
        return Spanner(algo="linear", k=k, eps=eps, n=g.n, edges=[],
                       source_hash=graph_hash(g), ops=ops)

    norm, _ = normalize_weights(g)
    mst = minimum_spanning_tree(norm)
    key_to_eid = {
        (min(u, v), max(u, v)): eid for eid, (u, v, _) in enumerate(norm.edges)
    }
    mst_eids = {key_to_eid[(min(u, v), max(u, v))] for u, v, _ in mst.edges}
    spanner_eids: set[int] = set(mst_eids)

    # bucket only non-tree edges; tree edges are already in the spanner and
    # are instead consumed as merge candidates level by level
    rest = WeightedGraph(norm.n, [])  # container reuse: share edge ids
    rest.edges = norm.edges
    buckets_all = partition_edges(norm, eps_i)
    mu = mu_classes(eps_i)

    # MST edges keyed by raw grid index, ascending; identified by child vertex
    child_of_key = {}
    for u, v, w in mst.edges:
        child = u if mst.parent[u] == v else v
        child_of_key[(min(u, v), max(u, v))] = child
    mst_sorted = sorted(
        (bucket_raw_index(w, eps_i), child_of_key[(min(u, v), max(u, v))], w)
        for u, v, w in mst.edges
    )

    index = StaticTreeIndex(mst.parent)
    levels_log: list[dict] = []

    for sigma in buckets_all.classes():
        level_ids = [
            i for i in buckets_all.levels(sigma)
            if not set(buckets_all.edges(sigma, i)) <= mst_eids
        ]
        if not level_ids:
            continue
        if len(level_ids) == 1 and not instrument:
            # single processed level: clusters are still singletons and no
            # later level consumes the merges, so dedupe with identity
            # representatives and skip the union-find session outright
            i = level_ids[0]
            bucket = [e for e in buckets_all.edges(sigma, i) if e not in mst_eids]
            kept, reps = _select_bucket(norm, bucket, k, lambda v: v,
                                        spanner_eids, ops)
            levels_log.append(
                {"sigma": sigma, "i": i, "bucket_edges": len(bucket),
                 "rep_nodes": len(reps), "kept_edges": kept,
                 "delta": 0, "links": 0, "finds": 0, "y_nodes": 0,
                 "fast": True}
            )
            continue
        session = StaticTreeUF(index, mode=uf_mode)
        carried: list[int] = []   # inter-cluster MST edges (child ids), w <= L_i
        ptr = 0
        for i in level_ids:
            bucket = [e for e in buckets_all.edges(sigma, i) if e not in mst_eids]
            if not bucket:
                continue
            if instrument:
                _check_p2_subtree(
                    norm, mst, session,
                    budget=G_PM * level_scale(sigma, i - 1, eps_i),
                    check=check, tag=f"sigma={sigma} level={i}",
                )
            cost0 = session.cost
            kept, reps = _select_bucket(norm, bucket, k, session.find,
                                        spanner_eids, ops)

            # collect this level's merge candidates: carried forest edges
            # plus the newly in-range MST edges (weight <= L_i)
            j_cap = i * mu + sigma
            while ptr < len(mst_sorted) and mst_sorted[ptr][0] <= j_cap:
                carried.append(mst_sorted[ptr][1])
                ptr += 1
            links, carried, ynodes = _merge_level(
                norm, mst, session, carried, check,
                rep_nodes=reps, tag=f"sigma={sigma} i={i}",
            )
            ops["links"] += links
            levels_log.append(
                {"sigma": sigma, "i": i, "bucket_edges": len(bucket),
                 "rep_nodes": len(reps), "kept_edges": kept,
                 "delta": links, "links": links,
                 "finds": session.cost - cost0 - links, "y_nodes": ynodes}
            )
        ops["uf_cost"] += session.cost

    edges = [g.edges[e] for e in sorted(spanner_eids)]
    return Spanner(
        algo="linear", k=k, eps=eps, n=g.n, edges=edges,
        source_hash=graph_hash(g), levels=levels_log, ops=ops,
    )


def _select_bucket(norm, bucket, k, rep, spanner_eids: set[int],
                   ops: dict) -> tuple[int, list[int]]:
    """Dedupe a bucket in cluster space, run the unweighted spanner on the
    representative graph, keep the matching source edges."""
    best = dedupe_source_edges(bucket, norm, rep)
    if not best:
        return 0, []
    reps = sorted({r for pair in best for r in pair})
    local = {r: idx for idx, r in enumerate(reps)}
    rg = UnweightedGraph(len(reps), [(local[a], local[b]) for (a, b) in best])
    stats: dict = {"ops": 0}
    chosen = hz_spanner(rg, k, stats=stats)
    ops["hz"] += stats["ops"]
    kept = 0
    for a, b in chosen:
        ra, rb = reps[a], reps[b]
        key = (ra, rb) if ra < rb else (rb, ra)
        spanner_eids.add(best[key])
        kept += 1
    return kept, reps


def cluster_forest_edges(
    session: StaticTreeUF, mst, carried: list[int]
) -> tuple[list[tuple[int, int, int]], dict[int, int]]:
    """Materialize the level's merge candidates as cluster pairs.

    `carried` holds the in-range MST edges by child vertex; each maps to
    (find(child), find(parent)) and every incident cluster joins the node
    set.  The MST cycle property guarantees this node set covers every
    cluster touched by a surviving bucket edge."""
    pairs: list[tuple[int, int, int]] = []
    nodeset: dict[int, int] = {}
    for child in carried:
        a = session.find(child)
        b = session.find(mst.parent[child])
        if a == b:
            raise AssertionError("carried MST edge became intra-cluster")
        for r in (a, b):
            if r not in nodeset:
                nodeset[r] = len(nodeset)
        pairs.append((nodeset[a], nodeset[b], child))
    return pairs, nodeset


def merge_forest_subtrees(
    session: StaticTreeUF, pairs: list[tuple[int, int, int]], n_nodes: int
) -> tuple[int, list[int]]:
    """Star-cover the cluster forest and Link each in-subtree edge; returns
    (links performed, leftover child ids crossing different subtrees)."""
    adj: list[list[int]] = [[] for _ in range(n_nodes)]
    child_by_pair: dict[tuple[int, int], int] = {}
    for a, b, child in pairs:
        adj[a].append(b)
        adj[b].append(a)
        key = (a, b) if a < b else (b, a)
        if key in child_by_pair:
            raise AssertionError("parallel cluster-forest edge")
        child_by_pair[key] = child
    for lst in adj:
        lst.sort()

    owner = {}
    links = 0
    for gid, (nodes, star_edges) in enumerate(grow_star_cover(n_nodes, adj)):
        for x in nodes:
            owner[x] = gid
        for a, b in star_edges:
            child = child_by_pair[(a, b) if a < b else (b, a)]
            session.link(child)
            links += 1
    leftovers = [child for a, b, child in pairs if owner[a] != owner[b]]
    return links, leftovers


def _merge_level(
    norm: WeightedGraph,
    mst,
    session: StaticTreeUF,
    carried: list[int],
    check: Optional[Callable[[str, bool, str], None]],
    rep_nodes: list[int],
    tag: str,
) -> tuple[int, list[int], int]:
    pairs, nodeset = cluster_forest_edges(session, mst, carried)
    if check is not None:
        got = set(nodeset)
        ok = all(r in got for r in rep_nodes)
        check("x-subset-y", ok, f"{tag} |X|={len(rep_nodes)} |Y|={len(nodeset)}")
    if not pairs:
        return 0, [], 0
    links, leftovers = merge_forest_subtrees(session, pairs, len(nodeset))
    if check is not None:
        check("merge-reduction", links >= len(nodeset) / 2,
              f"{tag} links={links} |Y|={len(nodeset)}")
    return links, leftovers, len(nodeset)


def _check_p2_subtree(
    norm: WeightedGraph,
    mst,
    session: StaticTreeUF,
    budget: float,
    check: Optional[Callable[[str, bool, str], None]],
    tag: str,
) -> None:
    """Each cluster induces a connected MST subtree of bounded diameter."""
    if check is None or norm.n > 200:
        return
    clusters: dict[int, list[int]] = {}
    for v in range(norm.n):
        clusters.setdefault(session.find(v), []).append(v)
    check("p1-partition", sum(len(c) for c in clusters.values()) == norm.n, tag)

    tree_adj: list[list[tuple[int, float]]] = [[] for _ in range(norm.n)]
    for u, v, w in mst.edges:
        tree_adj[u].append((v, w))
        tree_adj[v].append((u, w))
    ok_conn = True
    ok_diam = True
    for rep, members in clusters.items():
        mem = set(members)
        # connectivity plus eccentricity inside the induced subtree
        far, reach = _tree_far(tree_adj, members[0], mem)
        if len(reach) != len(mem):
            ok_conn = False
            break
        far2, _ = _tree_far(tree_adj, far, mem)
        dist = _tree_dist(tree_adj, far, far2, mem)
        if budget <= 0:
            if len(mem) > 1:
                ok_diam = False
        elif not dist <= budget * (1 + 1e-9):
            ok_diam = False
        if check is not None and not (ok_conn and ok_diam):
            break
        if rep not in mem:
            ok_conn = False
            break
    check("p2-subtree-connected", ok_conn, tag)
    check("p2-subtree-diameter", ok_diam, tag)


def _tree_far(tree_adj, start: int, allowed: set[int]) -> tuple[int, set[int]]:
    best, best_d = start, 0.0
    seen = {start}
    stack = [(start, 0.0)]
    while stack:
        u, d = stack.pop()
        if d > best_d:
            best, best_d = u, d
        for v, w in tree_adj[u]:
            if v in allowed and v not in seen:
                seen.add(v)
                stack.append((v, d + w))
    return best, seen


def _tree_dist(tree_adj, a: int, b: int, allowed: set[int]) -> float:
    stack = [(a, 0.0)]
    seen = {a}
    while stack:
        u, d = stack.pop()
        if u == b:
            return d
        for v, w in tree_adj[u]:
            if v in allowed and v not in seen:
                seen.add(v)
                stack.append((v, d + w))
    return 0.0