"""Sparse + light pipeline: light/heavy split, subdivided MST, per-class
potential-driven cluster hierarchy, and three-step edge selection.

The heavy side works over the MST subdivided at granularity
wbar = w(MST)/(m*eps): clusters are subgraphs of the subdivided tree (plus
selected bucket edges), each cluster carries a potential equal to the
augmented diameter it was formed with, and every level's spanner weight is
paid for by the potential drop.  Light edges plus the MST go through the
pointer-machine construction and the MST itself is always included.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .buckets import bucket_raw_index, level_scale, mu_classes
from .graphs import (
    WeightedGraph,
    connected_components,
    induced_subgraph,
    minimum_spanning_tree,
)
from .pm import build_pm
from .spanner import Spanner, graph_hash
from . import lightsteps as steps

G_LIGHT = 42
EPS_SCALE_LIGHT = 10 * G_LIGHT + 1  # stretch chain ends at (2k-1)(1+(10g+1)eps')
FILTER_SLACK = 6 * G_LIGHT          # tree-path filter keeps only stretch > (2k-1)(1+6g*eps')


def internal_eps_light(eps: float, nominal: bool = False) -> float:
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    cap = 1.0 / (4 * G_LIGHT)
    return min(eps, cap) if nominal else min(eps / EPS_SCALE_LIGHT, cap)


# ---------------------------------------------------------------- split


def split_light_heavy(
    g: WeightedGraph, eps: float, mst_weight: Optional[float] = None
) -> tuple[list[int], list[int], int]:
    """Edge ids (light, heavy, discarded-count).

    Light: w <= w(MST)/(m*eps).  Heavy: the rest, except edges of weight
    >= w(MST), which the MST already spans within stretch 1 and are
    discarded outright.
    """
    if mst_weight is None:
        mst_weight = minimum_spanning_tree(g).weight
    threshold = mst_weight / (g.m * eps)
    light: list[int] = []
    heavy: list[int] = []
    discarded = 0
    for eid, (_, _, w) in enumerate(g.edges):
        if w <= threshold:
            light.append(eid)
        elif w < mst_weight:
            heavy.append(eid)
        else:
            discarded += 1
    return light, heavy, discarded


# ---------------------------------------------------------------- subdivide


@dataclass
class SubdividedMst:
    n_real: int
    n_total: int
    # tree edges (a, b, w, parent_eid); parent_eid indexes the MST edge list
    edges: list[tuple[int, int, float, int]]
    # for virtual vertices (ids >= n_real): the MST edge they subdivide
    virtual_parent: list[int] = field(default_factory=list)
    wbar: float = 0.0

    def parent_edge_of(self, v: int) -> int:
        return self.virtual_parent[v - self.n_real] if v >= self.n_real else -1

    def adjacency(self) -> list[list[tuple[int, float, int]]]:
        adj: list[list[tuple[int, float, int]]] = [[] for _ in range(self.n_total)]
        for sid, (a, b, w, _) in enumerate(self.edges):
            adj[a].append((b, w, sid))
            adj[b].append((a, w, sid))
        return adj


def subdivide_mst(mst, wbar: float, n_real: int) -> SubdividedMst:
    """Split every tree edge heavier than wbar into ceil(w/wbar) sub-edges
    of weight wbar apiece with a lighter last piece; total weight kept."""
    if wbar <= 0:
        raise ValueError("wbar must be positive")
    out = SubdividedMst(n_real=n_real, n_total=n_real, edges=[], wbar=wbar)
    for peid, (u, v, w) in enumerate(mst.edges):
        pieces = max(1, math.ceil(w / wbar - 1e-12))
        if pieces == 1:
            out.edges.append((u, v, w, peid))
            continue
        prev = u
        remaining = w
        for _ in range(pieces - 1):
            mid = out.n_total
            out.n_total += 1
            out.virtual_parent.append(peid)
            out.edges.append((prev, mid, wbar, peid))
            prev = mid
            remaining -= wbar
        out.edges.append((prev, v, remaining, peid))
    return out


# ---------------------------------------------------------------- build


def build_light(
    g: WeightedGraph,
    k: int,
    eps: float,
    nominal_eps: bool = False,
    instrument: bool = False,
    check: Optional[Callable[[str, bool, str], None]] = None,
) -> Spanner:
    """(2k-1)(1+eps)-spanner with bounded lightness and sparsity.

    Output = pm-spanner of (light edges + MST)  +  heavy-side selection
    + the MST itself.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    comps = connected_components(g)
    if len(comps) <= 1:
        return _build_connected(g, k, eps, nominal_eps, instrument, check)
    edges: list[tuple[int, int, float]] = []
    levels: list[dict] = []
    ops: dict = {}
    for comp in comps:
        sub, back = induced_subgraph(g, sorted(comp))
        part = _build_connected(sub, k, eps, nominal_eps, instrument, check)
        edges.extend((back[u], back[v], w) for u, v, w in part.edges)
        levels.extend(part.levels)
        for key, val in part.ops.items():
            ops[key] = ops.get(key, 0) + val
    edges.sort()
    return Spanner(algo="light", k=k, eps=eps, n=g.n, edges=edges,
                   source_hash=graph_hash(g), levels=levels, ops=ops)


def _build_connected(
    g: WeightedGraph,
    k: int,
    eps: float,
    nominal_eps: bool,
    instrument: bool,
    check: Optional[Callable[[str, bool, str], None]],
) -> Spanner:
    ops: dict = {"pm_uf": 0, "hz": 0, "level_work": 0}
    if g.m == 0:
        return Spanner(algo="light", k=k, eps=eps, n=g.n, edges=[],
                       source_hash=graph_hash(g), ops=ops)
    mst = minimum_spanning_tree(g)
    key_to_eid = {(min(u, v), max(u, v)): eid for eid, (u, v, _) in enumerate(g.edges)}
    mst_eids = {key_to_eid[(min(u, v), max(u, v))] for u, v, _ in mst.edges}

    light_ids, heavy_ids, discarded = split_light_heavy(g, eps, mst.weight)

    chosen: set[int] = set(mst_eids)
    # light part through the sparse construction (light edges + the MST)
    light_pool = sorted(set(light_ids) | mst_eids)
    if light_pool:
        lg = WeightedGraph(g.n, [g.edges[e] for e in light_pool])
        hp = build_pm(lg, k, eps, nominal_eps=nominal_eps)
        ops["pm_uf"] = hp.ops.get("uf", 0)
        ops["hz"] = hp.ops.get("hz", 0)
        back_key = {(min(u, v), max(u, v)): eid
                    for eid, (u, v, _) in zip(light_pool, lg.edges)}
        for u, v, _ in hp.edges:
            chosen.add(back_key[(min(u, v), max(u, v))])

    levels_log: list[dict] = []
    heavy_pool = [e for e in heavy_ids if e not in mst_eids]
    if heavy_pool:
        _build_heavy(
            g, mst, heavy_pool, k, eps, nominal_eps, instrument, check,
            chosen, levels_log, ops,
        )
    if instrument and check is not None:
        check("discarded-heaviest", discarded >= 0, f"discarded={discarded}")

    edges = [g.edges[e] for e in sorted(chosen)]
    return Spanner(algo="light", k=k, eps=eps, n=g.n, edges=edges,
                   source_hash=graph_hash(g), levels=levels_log, ops=ops)


def _build_heavy(
    g: WeightedGraph,
    mst,
    heavy_pool: list[int],
    k: int,
    eps: float,
    nominal_eps: bool,
    instrument: bool,
    check,
    chosen: set[int],
    levels_log: list[dict],
    ops: dict,
) -> None:
    eps_i = internal_eps_light(eps, nominal_eps)
    mu = mu_classes(eps_i)
    wbar = mst.weight / (g.m * eps)
    sub = subdivide_mst(mst, wbar, g.n)
    if check is not None:
        check("virtual-count", sub.n_total <= 2 * (g.n + g.m) + 2,
              f"|V~|={sub.n_total} n={g.n} m={g.m}")

    # bucket the heavy edges on the wbar-based grid
    classes: dict[int, dict[int, list[int]]] = {}
    for eid in heavy_pool:
        w = g.edges[eid][2]
        j = bucket_raw_index(w, eps_i, wbar)
        classes.setdefault(j % mu, {}).setdefault(j // mu, []).append(eid)

    filter_factor = (2 * k - 1) * (1.0 + FILTER_SLACK * eps_i)
    ctx = steps.StepContext(
        g=g, sub=sub, k=k, eps=eps_i, gconst=G_LIGHT,
        filter_factor=filter_factor, check=check, instrument=instrument,
    )
    shared_base = steps.singleton_state(sub)
    shared_lca = steps.TreeLCA(shared_base)
    ladder: dict[int, steps.ClassState] = {}

    for sigma in sorted(classes):
        per_level = classes[sigma]
        level_ids = sorted(per_level)
        single = len(level_ids) == 1
        state: Optional[steps.ClassState] = None
        lca: Optional[steps.TreeLCA] = None
        phi_first = None
        for i in level_ids:
            li = level_scale(sigma, i, eps_i, wbar)
            prev = level_scale(sigma, i - 1, eps_i, wbar) if i > 0 \
                else wbar * (1.0 + eps_i) ** (sigma - mu)
            if state is None:
                state, lca = _base_state(
                    sub, prev, wbar, ladder, shared_base, shared_lca, ctx
                )
            elif state.scale < prev * (1 - 1e-12):
                state = steps.coarsen(state, prev, ctx, levels_log, sigma, i)
                lca = None
            if lca is None:
                lca = steps.TreeLCA(state)
            if phi_first is None:
                phi_first = sum(state.pot)
                if check is not None:
                    check("phi1-bound", phi_first <= mst.weight * (1 + 1e-9),
                          f"sigma={sigma} phi1={phi_first} w(mst)={mst.weight}")

            if check is not None:
                check("imax-bound", i <= 4 * math.log2(max(g.n, 2)) + 20,
                      f"sigma={sigma} i={i} n={g.n}")
            bucket = per_level[i]
            ei = steps.build_cluster_graph(state, bucket, g, li, lca, ctx)
            ops["level_work"] += state.count + len(bucket)
            if not ei:
                levels_log.append(steps.trivial_row(sigma, i, state, len(bucket)))
                continue

            fast = (
                single and not instrument
                and not steps.has_high_degree(state, ei, ctx)
            )
            if fast:
                for entry in ei:
                    chosen.add(entry[3])
                levels_log.append(
                    steps.trivial_row(sigma, i, state, len(bucket), added=len(ei))
                )
                continue

            state, picked, row = steps.process_level(state, ei, li, sigma, i, ctx)
            lca = None  # contracted tree changed; rebuilt on demand next level
            chosen.update(picked)
            levels_log.append(row)


def _base_state(sub, prev_scale, wbar, ladder, shared_base, shared_lca, ctx):
    """Entering clusters for a class's first processed level: singletons when
    the previous scale undercuts the subdivision granularity, otherwise a
    cached carve of the subdivided tree at a power-of-two scale in
    [prev_scale, 2*prev_scale)."""
    if prev_scale < wbar * (1 - 1e-12):
        return shared_base, shared_lca
    t = max(0, math.ceil(math.log2(prev_scale / wbar) - 1e-12))
    if t not in ladder:
        ladder[t] = steps.carved_state(sub, wbar * (2.0 ** t), ctx)
    st = ladder[t]
    return st, steps.TreeLCA(st)
