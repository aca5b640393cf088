"""Per-level machinery of the sparse+light construction: contracted cluster
graphs with node potentials, the five clustering steps, long-path breaking,
and the three-step edge selection.

Cluster state is rebuilt wholesale between levels: a level's subgraph
collection becomes the next level's node set, node weights are the
subgraphs' augmented diameters, and the contracted spanning tree is
re-derived from the crossing subdivided-tree edges.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .graphs import WeightedGraph
from .hz import UnweightedGraph, hz_spanner


@dataclass
class StepContext:
    g: WeightedGraph
    sub: object                 # SubdividedMst; loose to avoid an import cycle
    k: int
    eps: float
    gconst: int
    filter_factor: float
    check: Optional[Callable[[str, bool, str], None]] = None
    instrument: bool = False
    tau_override: Optional[int] = None

    @property
    def tau_high(self) -> int:
        if self.tau_override is not None:
            return self.tau_override
        return math.ceil(2 * self.gconst / self.eps)

    def report(self, name: str, ok: bool, detail: str) -> None:
        if self.check is not None:
            self.check(name, ok, detail)


@dataclass
class ClassState:
    """One level's clusters over the subdivided tree (treated immutably)."""

    count: int
    pot: list[float]            # node weight = potential = formation Adm
    virtual: list[bool]
    par_eid: list[int]          # parent MST edge of an all-virtual cluster
    tree: list[tuple[int, int, float, int]]   # contracted spanning tree
    cl_of_sub: list[int]
    scale: float                # scale the clusters were formed at

    def adjacency(self) -> list[list[tuple[int, float, int]]]:
        adj: list[list[tuple[int, float, int]]] = [[] for _ in range(self.count)]
        for a, b, w, sid in self.tree:
            adj[a].append((b, w, sid))
            adj[b].append((a, w, sid))
        return adj


# ---------------------------------------------------------------- bases


def singleton_state(sub) -> ClassState:
    n = sub.n_total
    return ClassState(
        count=n,
        pot=[0.0] * n,
        virtual=[v >= sub.n_real for v in range(n)],
        par_eid=[sub.parent_edge_of(v) for v in range(n)],
        tree=list(sub.edges),
        cl_of_sub=list(range(n)),
        scale=0.0,
    )


def carved_state(sub, scale: float, ctx: StepContext) -> ClassState:
    """Base clusters: subdivided tree carved into subtrees of diameter in
    [scale, ~6*scale] (single piece exempt from the lower bound)."""
    base = singleton_state(sub)
    state, _ = _carve_tree(base, scale, use_pot=False)
    ok = all(d <= 14 * scale * (1 + 1e-9) for d in state.pot)
    if len(state.pot) > 1:
        ok = ok and all(d >= scale * (1 - 1e-9) for d in state.pot)
    lo = min(state.pot) if state.pot else 0.0
    hi = max(state.pot) if state.pot else 0.0
    ctx.report("level1-diameter", ok,
               f"scale={scale} diam range [{lo:.3g},{hi:.3g}]")
    return state


def coarsen(state: ClassState, scale: float, ctx: StepContext,
            log: list[dict], sigma: int, i: int) -> ClassState:
    """Merge clusters up to a coarser scale before a level jump; pure tree
    carve at the target scale, logged as a pseudo-level."""
    phi_before = sum(state.pot)
    new, piece_of = _carve_tree(state, scale, use_pot=True)
    log.append({
        "sigma": sigma, "i": i, "coarsen": True,
        "v_nodes": state.count, "e_edges": 0, "y_nodes": 0,
        "n_nodes": sum(1 for v in new.virtual if not v),
        "phi": phi_before, "delta": phi_before - sum(new.pot),
        "a_i": 0.0, "step_edge_counts": [0, 0, 0], "degenerate": False,
    })
    if ctx.instrument:
        internal: dict[int, float] = {}
        for a, b, w, sid in state.tree:
            if piece_of[a] == piece_of[b]:
                internal[piece_of[a]] = internal.get(piece_of[a], 0.0) + w
        summed: dict[int, float] = {}
        for c in range(state.count):
            summed[piece_of[c]] = summed.get(piece_of[c], 0.0) + state.pot[c]
        ok = all(
            summed.get(p, 0.0) + internal.get(p, 0.0) - adm
            >= -1e-9 * max(1.0, adm)
            for p, adm in enumerate(new.pot)
        )
        ctx.report("coarsen-dplus", ok, f"sigma={sigma} i={i}")
    return new


def _carve_tree(state: ClassState, scale: float,
                use_pot: bool) -> tuple[ClassState, list[int]]:
    """Carve the (possibly contracted) tree into pieces of augmented
    diameter >= scale (except a lone piece) and O(scale)."""
    count = state.count
    nodew = state.pot if use_pot else [0.0] * count
    adj = state.adjacency()

    parent = [-2] * count
    order: list[int] = []
    parent[0] = -1
    stack = [0]
    while stack:
        v = stack.pop()
        order.append(v)
        for u, w, sid in adj[v]:
            if parent[u] == -2:
                parent[u] = v
                stack.append(u)

    piece_of = [-1] * count
    pieces: list[list[int]] = []
    res_children: list[list[int]] = [[] for _ in range(count)]
    down = [0.0] * count

    def carve_at(v: int) -> None:
        pid = len(pieces)
        members = []
        st = [v]
        while st:
            x = st.pop()
            members.append(x)
            piece_of[x] = pid
            st.extend(res_children[x])
        pieces.append(members)

    for v in reversed(order):
        best = 0.0
        for u, w, sid in adj[v]:
            if parent[u] == v and piece_of[u] == -1:
                res_children[v].append(u)
                best = max(best, w + down[u])
        down[v] = nodew[v] + best
        if down[v] >= scale and v != 0:
            carve_at(v)
    # root leftover: absorb into an adjacent piece, or close as final piece
    leftover = [v for v in order if piece_of[v] == -1]
    if leftover:
        target = -1
        for v in leftover:
            for u, w, sid in adj[v]:
                if piece_of[u] != -1:
                    target = piece_of[u]
                    break
            if target != -1:
                break
        if target == -1:
            carve_at(0)
        else:
            for v in leftover:
                piece_of[v] = target
                pieces[target].append(v)

    adm = _piece_adms(state, piece_of, pieces, nodew)
    n_pieces = len(pieces)
    virtual = [True] * n_pieces
    par_eid = [-1] * n_pieces
    for pid, mem in enumerate(pieces):
        for c in mem:
            if not state.virtual[c]:
                virtual[pid] = False
                par_eid[pid] = -1
                break
            par_eid[pid] = state.par_eid[c]
    tree = _contract(state.tree, piece_of, n_pieces) if n_pieces > 1 else []
    new = ClassState(
        count=n_pieces, pot=adm, virtual=virtual, par_eid=par_eid,
        tree=tree, cl_of_sub=[piece_of[c] for c in state.cl_of_sub],
        scale=scale,
    )
    return new, piece_of


def _piece_adms(state: ClassState, piece_of: list[int],
                members: list[list[int]], nodew: list[float]) -> list[float]:
    """Exact augmented diameter of each piece's induced subtree."""
    adj = state.adjacency()
    adm = [0.0] * len(members)
    down: dict[int, float] = {}
    for pid, mem in enumerate(members):
        memset = set(mem)
        root = mem[0]
        orderp: list[int] = []
        par: dict[int, int] = {root: -1}
        st = [root]
        while st:
            v = st.pop()
            orderp.append(v)
            for u, w, sid in adj[v]:
                if u in memset and u not in par:
                    par[u] = v
                    st.append(u)
        best_all = 0.0
        for v in reversed(orderp):
            top1 = 0.0
            top2 = 0.0
            for u, w, sid in adj[v]:
                if u in memset and par.get(u) == v:
                    val = w + down[u]
                    if val > top1:
                        top1, top2 = val, top1
                    elif val > top2:
                        top2 = val
            down[v] = nodew[v] + top1
            cand = nodew[v] + top1 + top2
            if cand > best_all:
                best_all = cand
        adm[pid] = max(best_all, max(nodew[v] for v in mem))
    return adm


def _contract(tree_edges, piece_of: list[int], n_pieces: int):
    """Spanning tree of the contraction: Kruskal over crossing tree edges."""
    crossing = []
    for a, b, w, sid in tree_edges:
        pa, pb = piece_of[a], piece_of[b]
        if pa != pb:
            crossing.append((w, sid, pa, pb))
    crossing.sort()
    parent = list(range(n_pieces))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    out = []
    for w, sid, pa, pb in crossing:
        ra, rb = find(pa), find(pb)
        if ra != rb:
            parent[ra] = rb
            out.append((pa, pb, w, sid))
    if len(out) != n_pieces - 1:
        raise AssertionError("contracted tree failed to span the clusters")
    return out


# ---------------------------------------------------------------- LCA


class TreeLCA:
    """Augmented tree distances (edges plus node weights, endpoints
    included) via Euler tour + sparse-table minimum."""

    def __init__(self, state: ClassState):
        count = state.count
        adj = state.adjacency()
        self.pot = state.pot
        depth = [0] * count
        dist = [0.0] * count       # root path: all node weights + edges
        parent = [-2] * count
        parent[0] = -1
        dist[0] = state.pot[0]
        tour: list[int] = []
        first = [-1] * count
        stack: list[tuple[int, bool]] = [(0, False)]
        while stack:
            v, back = stack.pop()
            tour.append(v)
            if back:
                continue
            if first[v] == -1:
                first[v] = len(tour) - 1
            for u, w, sid in adj[v]:
                if parent[u] == -2:
                    parent[u] = v
                    depth[u] = depth[v] + 1
                    dist[u] = dist[v] + w + state.pot[u]
                    stack.append((v, True))
                    stack.append((u, False))
        for idx, v in enumerate(tour):
            if first[v] == -1:
                first[v] = idx
        self.first = first
        self.dist = dist
        seq = [(depth[v], v) for v in tour]
        size = len(seq)
        logs = [0] * (size + 1)
        for x in range(2, size + 1):
            logs[x] = logs[x // 2] + 1
        table = [seq]
        j = 1
        while (1 << j) <= size:
            prev = table[-1]
            cur = [min(prev[x], prev[x + (1 << (j - 1))])
                   for x in range(size - (1 << j) + 1)]
            table.append(cur)
            j += 1
        self.table = table
        self.logs = logs

    def lca(self, a: int, b: int) -> int:
        x, y = self.first[a], self.first[b]
        if x > y:
            x, y = y, x
        j = self.logs[y - x + 1]
        return min(self.table[j][x], self.table[j][y - (1 << j) + 1])[1]

    def aug_dist(self, a: int, b: int) -> float:
        if a == b:
            return self.pot[a]
        anc = self.lca(a, b)
        return self.dist[a] + self.dist[b] - 2 * self.dist[anc] + self.pot[anc]


# ---------------------------------------------------------------- cluster graph


def build_cluster_graph(
    state: ClassState,
    bucket: list[int],
    g: WeightedGraph,
    li: float,
    lca: TreeLCA,
    ctx: StepContext,
) -> list[tuple[int, int, float, int]]:
    """Level edge set: bucket edges mapped to cluster pairs, self-loops
    dropped, parallels deduped to the lightest, and edges whose tree path
    (augmented) already realizes the target stretch filtered out."""
    best: dict[tuple[int, int], tuple[float, int]] = {}
    for eid in bucket:
        u, v, w = g.edges[eid]
        ca, cb = state.cl_of_sub[u], state.cl_of_sub[v]
        if ca == cb:
            continue
        key = (ca, cb) if ca < cb else (cb, ca)
        cur = best.get(key)
        if cur is None or (w, eid) < cur:
            best[key] = (w, eid)
    out = []
    for (ca, cb), (w, eid) in sorted(best.items()):
        if lca.aug_dist(ca, cb) <= ctx.filter_factor * w * (1 + 1e-12):
            continue
        out.append((ca, cb, w, eid))
    return out


def has_high_degree(state: ClassState, ei, ctx: StepContext) -> bool:
    deg: dict[int, int] = {}
    tau = ctx.tau_high
    for a, b, w, eid in ei:
        for x in (a, b):
            deg[x] = deg.get(x, 0) + 1
            if deg[x] >= tau:
                return True
    return False


def trivial_row(sigma: int, i: int, state: ClassState, bucket: int,
                added: int = 0) -> dict:
    return {
        "sigma": sigma, "i": i, "v_nodes": state.count, "e_edges": added,
        "y_nodes": 0, "n_nodes": sum(1 for v in state.virtual if not v),
        "phi": sum(state.pot), "delta": 0.0, "a_i": 0.0,
        "step_edge_counts": [0, 0, added], "degenerate": False,
        "bucket_edges": bucket,
    }


# ---------------------------------------------------------------- subgraphs


@dataclass
class Subgraph:
    step: str
    nodes: list[int] = field(default_factory=list)
    graph_edges: list[tuple[int, int, float]] = field(default_factory=list)
    tree_weight: float = 0.0     # total weight of contracted-tree edges inside
    ei_idx: list[int] = field(default_factory=list)
    kind: str = ""               # high / low+ / low-
    endpoint_piece: bool = False

    def adm(self, pot: list[float]) -> float:
        return _subgraph_adm(self.nodes, self.graph_edges, pot)


def _subgraph_adm(nodes: list[int], edges: list[tuple[int, int, float]],
                  pot: list[float]) -> float:
    if not nodes:
        return 0.0
    adj: dict[int, list[tuple[int, float]]] = {v: [] for v in nodes}
    for a, b, w in edges:
        adj[a].append((b, w))
        adj[b].append((a, w))
    root = nodes[0]
    par: dict[int, int] = {root: -1}
    order = [root]
    st = [root]
    while st:
        v = st.pop()
        for u, w in adj[v]:
            if u not in par:
                par[u] = v
                order.append(u)
                st.append(u)
    if len(order) != len(nodes):
        raise AssertionError("subgraph is not connected")
    down: dict[int, float] = {}
    best = max(pot[v] for v in nodes)
    for v in reversed(order):
        top1 = top2 = 0.0
        for u, w in adj[v]:
            if par.get(u) == v:
                val = w + down[u]
                if val > top1:
                    top1, top2 = val, top1
                elif val > top2:
                    top2 = val
        down[v] = pot[v] + top1
        best = max(best, pot[v] + top1 + top2)
    return best


# ---------------------------------------------------------------- level build


class _Level:
    """Working storage for one level's five-step subgraph construction."""

    def __init__(self, state: ClassState, ei, li: float, ctx: StepContext):
        self.state = state
        self.ei = ei
        self.li = li
        self.ctx = ctx
        self.adj = state.adjacency()
        self.pot = state.pot
        self.count = state.count
        self.deg = [0] * state.count
        self.inc: list[list[int]] = [[] for _ in range(state.count)]
        for idx, (a, b, w, eid) in enumerate(ei):
            self.deg[a] += 1
            self.deg[b] += 1
            self.inc[a].append(idx)
            self.inc[b].append(idx)
        self.nonisolated = [d > 0 for d in self.deg]
        self.assigned = [-1] * state.count
        self.xs: list[Subgraph] = []

    # -- subgraph plumbing

    def new_x(self, step: str) -> int:
        self.xs.append(Subgraph(step=step))
        return len(self.xs) - 1

    def absorb(self, xid: int, node: int,
               via: Optional[tuple[int, float, bool]] = None) -> None:
        """Add node to subgraph xid, optionally through (other, w, is_tree)."""
        if self.assigned[node] != -1:
            raise AssertionError("node already assigned")
        x = self.xs[xid]
        x.nodes.append(node)
        self.assigned[node] = xid
        if via is not None:
            other, w, is_tree = via
            x.graph_edges.append((other, node, w))
            if is_tree:
                x.tree_weight += w

    def merge_into(self, src: int, dst: int, bridge: tuple[int, int, float, bool]) -> None:
        a, b, w, is_tree = bridge
        xs, xd = self.xs[src], self.xs[dst]
        for v in xs.nodes:
            self.assigned[v] = dst
        xd.nodes.extend(xs.nodes)
        xd.graph_edges.extend(xs.graph_edges)
        xd.graph_edges.append((a, b, w))
        xd.tree_weight += xs.tree_weight + (w if is_tree else 0.0)
        xd.ei_idx.extend(xs.ei_idx)
        xs.nodes = []
        xs.graph_edges = []
        xs.ei_idx = []
        xs.step = "merged"

    def unassigned_tree_neighbors(self, xid: int):
        for v in self.xs[xid].nodes:
            for u, w, sid in self.adj[v]:
                if self.assigned[u] == -1:
                    yield v, u, w

    def components(self) -> list[list[int]]:
        """Connected components of the contracted tree minus assigned nodes."""
        seen = [False] * self.count
        comps = []
        for s in range(self.count):
            if seen[s] or self.assigned[s] != -1:
                continue
            comp = [s]
            seen[s] = True
            st = [s]
            while st:
                v = st.pop()
                for u, w, sid in self.adj[v]:
                    if not seen[u] and self.assigned[u] == -1:
                        seen[u] = True
                        comp.append(u)
                        st.append(u)
            comps.append(comp)
        return comps

    def comp_adm(self, comp: list[int]) -> float:
        memset = set(comp)
        edges = [
            (v, u, w)
            for v in comp
            for u, w, sid in self.adj[v]
            if u in memset and v < u
        ]
        return _subgraph_adm(comp, edges, self.pot)


# the five steps live in dedicated helpers; `process_level` drives them


def process_level(state: ClassState, ei, li: float, sigma: int, i: int,
                  ctx: StepContext):
    lvl = _Level(state, ei, li, ctx)
    step1_high(lvl)
    step2_branching(lvl)
    step3_absorb_branching(lvl)
    step4_blue_edges(lvl)
    degenerate = not any(
        x.nodes and x.step in ("star", "ball", "blue") for x in lvl.xs
    )
    step5_paths(lvl)
    _force_min_adm(lvl)
    _classify(lvl, degenerate)
    picked, counts = select_level_edges(lvl)
    row, new_state = _finish_level(lvl, sigma, i, degenerate, picked, counts)
    return new_state, picked, row


# the spec-facing name for the five-step subgraph construction
cluster_step = process_level


# ---------------------------------------------------------------- step 1


def step1_high(lvl: _Level) -> None:
    """Trees covering every high-degree node and all their level-edge
    neighbors; stars centered at high nodes, leftovers attach to a star."""
    ctx = lvl.ctx
    tau = ctx.tau_high
    high = [v for v in range(lvl.count) if lvl.deg[v] >= tau]
    if not high:
        return
    highset = set(high)
    kadj: list[list[tuple[int, int]]] = [[] for _ in range(lvl.count)]
    plus = set(high)
    for idx, (a, b, w, eid) in enumerate(lvl.ei):
        if a in highset or b in highset:
            kadj[a].append((b, idx))
            kadj[b].append((a, idx))
            plus.add(a)
            plus.add(b)
    for lst in kadj:
        lst.sort()

    step1_nodes: set[int] = set()
    for phi in sorted(high):
        if lvl.assigned[phi] != -1:
            continue
        free = [entry for entry in kadj[phi] if lvl.assigned[entry[0]] == -1
                and entry[0] != phi]
        if not free:
            continue
        xid = lvl.new_x("star")
        lvl.absorb(xid, phi)
        step1_nodes.add(phi)
        seen = set()
        for u, idx in free:
            if u in seen or lvl.assigned[u] != -1:
                continue
            seen.add(u)
            lvl.absorb(xid, u, via=(phi, lvl.ei[idx][2], False))
            lvl.xs[xid].ei_idx.append(idx)
            step1_nodes.add(u)
    for v in sorted(plus):
        if lvl.assigned[v] != -1:
            continue
        target = None
        for u, idx in kadj[v]:
            if u in step1_nodes:
                target = (u, idx)
                break
        if target is None:
            raise AssertionError("high-neighborhood cover found no star neighbor")
        u, idx = target
        xid = lvl.assigned[u]
        lvl.absorb(xid, v, via=(u, lvl.ei[idx][2], False))
        lvl.xs[xid].ei_idx.append(idx)

    for xid, x in enumerate(lvl.xs):
        if x.step != "star" or not x.nodes:
            continue
        _pad_to_min_adm(lvl, xid)
        ctx.report(
            "step1-size", len(x.nodes) >= min(tau, lvl.count),
            f"|V(X)|={len(x.nodes)} tau={tau}", )


def _pad_to_min_adm(lvl: _Level, xid: int) -> None:
    """Grow a subgraph along unassigned tree neighbors until Adm >= L_i."""
    x = lvl.xs[xid]
    adm = x.adm(lvl.pot)
    guard = 4 * lvl.count + 4
    while adm < lvl.li * (1 - 1e-12) and guard:
        guard -= 1
        pick = None
        for v, u, w in lvl.unassigned_tree_neighbors(xid):
            if pick is None or (v, u) < (pick[0], pick[1]):
                pick = (v, u, w)
        if pick is None:
            break
        lvl.absorb(xid, pick[1], via=(pick[0], pick[2], True))
        adm = x.adm(lvl.pot)


# ---------------------------------------------------------------- step 2


def step2_branching(lvl: _Level) -> None:
    """Carve balls of augmented radius ~2L_i around branching nodes of long
    trees, then absorb not-good balls into neighbors or high trees."""
    ctx = lvl.ctx
    li = lvl.li
    worklist = lvl.components()
    balls: list[int] = []           # xid of carved balls
    ball_center: dict[int, int] = {}
    while worklist:
        comp = worklist.pop()
        if len(comp) == 1 and not _comp_has_branch(lvl, comp):
            continue
        if lvl.comp_adm(comp) < 6 * li:
            continue
        branch = _branching_nodes(lvl, comp)
        if not branch:
            continue
        center = min(
            branch, key=lambda v: (not lvl.nonisolated[v], v)
        )
        xid = _carve_ball(lvl, center, set(comp), 2 * li)
        balls.append(xid)
        ball_center[xid] = center
        remaining = [v for v in comp if lvl.assigned[v] == -1]
        worklist.extend(_split_components(lvl, remaining))

    # post-process: balls holding a non-isolated node need a second
    # non-virtual node; attach to a high tree or merge into a neighbor ball
    changed = True
    guard = 4 * len(balls) + 4
    while changed and guard:
        guard -= 1
        changed = False
        for xid in balls:
            x = lvl.xs[xid]
            if not x.nodes or _is_good(lvl, x):
                continue
            hook = _adjacent_subgraph(lvl, xid, prefer="star")
            if hook is None:
                hook = _adjacent_subgraph(lvl, xid, prefer="ball2")
            if hook is None:
                hook = _adjacent_subgraph(lvl, xid, prefer="any")
            if hook is None:
                ctx.report("step2-good-fixup", False,
                           f"stranded ball of {len(x.nodes)} nodes")
                continue
            other, bridge = hook
            if lvl.xs[other].step == "star":
                lvl.merge_into(xid, other, bridge)
            else:
                lvl.merge_into(xid, other, bridge)
            changed = True

    for xid in balls:
        x = lvl.xs[xid]
        if x.nodes:
            adm = x.adm(lvl.pot)
            ctx.report("step2-adm", li * (1 - 1e-9) <= adm <= 24 * li * (1 + 1e-9),
                       f"ball adm={adm} li={li}")


def _comp_has_branch(lvl: _Level, comp: list[int]) -> bool:
    return bool(_branching_nodes(lvl, comp))


def _branching_nodes(lvl: _Level, comp: list[int]) -> list[int]:
    memset = set(comp)
    out = []
    for v in comp:
        d = sum(1 for u, w, sid in lvl.adj[v] if u in memset)
        if d >= 3:
            out.append(v)
    return sorted(out)


def _carve_ball(lvl: _Level, center: int, allowed: set[int], radius: float) -> int:
    """Dijkstra ball by augmented distance; nodes reaching >= radius are
    included but not expanded."""
    xid = lvl.new_x("ball")
    dist = {center: lvl.pot[center]}
    via: dict[int, tuple[int, float]] = {}
    heap = [(lvl.pot[center], center)]
    popped: set[int] = set()
    orderd: list[int] = []
    while heap:
        d, v = heapq.heappop(heap)
        if v in popped or d > dist.get(v, math.inf):
            continue
        popped.add(v)
        orderd.append(v)
        if d >= radius:
            continue
        for u, w, sid in lvl.adj[v]:
            if u in allowed and lvl.assigned[u] == -1 and u not in popped:
                nd = d + w + lvl.pot[u]
                if nd < dist.get(u, math.inf):
                    dist[u] = nd
                    via[u] = (v, w)
                    heapq.heappush(heap, (nd, u))
    for v in orderd:
        if v == center:
            lvl.absorb(xid, v)
        else:
            pv, w = via[v]
            lvl.absorb(xid, v, via=(pv, w, True))
    return xid


def _split_components(lvl: _Level, nodes: list[int]) -> list[list[int]]:
    memset = set(nodes)
    seen: set[int] = set()
    comps = []
    for s in nodes:
        if s in seen:
            continue
        comp = [s]
        seen.add(s)
        st = [s]
        while st:
            v = st.pop()
            for u, w, sid in lvl.adj[v]:
                if u in memset and u not in seen:
                    seen.add(u)
                    comp.append(u)
                    st.append(u)
        comps.append(comp)
    return comps


def _is_good(lvl: _Level, x: Subgraph) -> bool:
    if not any(lvl.nonisolated[v] for v in x.nodes):
        return True
    return sum(1 for v in x.nodes if not lvl.state.virtual[v]) >= 2


def _adjacent_subgraph(lvl: _Level, xid: int, prefer: str):
    """A neighboring subgraph reachable by one tree edge from xid.

    prefer='star': only high trees.  prefer='ball2': balls with >= 2
    non-virtual nodes.  prefer='any': any other live subgraph."""
    best = None
    for v in lvl.xs[xid].nodes:
        for u, w, sid in lvl.adj[v]:
            other = lvl.assigned[u]
            if other == -1 or other == xid or not lvl.xs[other].nodes:
                continue
            ox = lvl.xs[other]
            if prefer == "star" and ox.step != "star":
                continue
            if prefer == "ball2":
                nonvirt = sum(1 for y in ox.nodes if not lvl.state.virtual[y])
                if ox.step != "ball" or nonvirt < 2:
                    continue
            key = (u, v)
            if best is None or key < best[2]:
                best = (other, (u, v, w, True), key)
    if best is None:
        return None
    return best[0], best[1]


# ---------------------------------------------------------------- step 3


def step3_absorb_branching(lvl: _Level) -> None:
    """Remove tree-branching nodes from long paths by attaching each to an
    adjacent already-formed subgraph."""
    for comp in lvl.components():
        if lvl.comp_adm(comp) < 6 * lvl.li or not _is_path(lvl, comp):
            continue
        memset = set(comp)
        for v in sorted(comp):
            full_deg = len(lvl.adj[v])
            if full_deg < 3:
                continue
            target = None
            for u, w, sid in lvl.adj[v]:
                other = lvl.assigned[u]
                if other != -1 and lvl.xs[other].nodes:
                    target = (other, u, w)
                    break
            if target is None:
                continue
            other, u, w = target
            lvl.absorb(other, v, via=(u, w, True))


def _is_path(lvl: _Level, comp: list[int]) -> bool:
    memset = set(comp)
    ends = 0
    for v in comp:
        d = sum(1 for u, w, sid in lvl.adj[v] if u in memset)
        if d > 2:
            return False
        if d <= 1:
            ends += 1
    return ends <= 2


# ---------------------------------------------------------------- step 4


def step4_blue_edges(lvl: _Level) -> None:
    """Eliminate level edges between deep-interior (blue) nodes of long
    paths by carving radius-L_i segments around both endpoints into one
    subgraph holding that single edge."""
    li = lvl.li
    guard = len(lvl.ei) + 4
    while guard:
        guard -= 1
        blue = _blue_nodes(lvl)
        pick = None
        for idx, (a, b, w, eid) in enumerate(lvl.ei):
            if a in blue and b in blue and lvl.assigned[a] == -1 \
                    and lvl.assigned[b] == -1:
                pick = idx
                break
        if pick is None:
            return
        a, b, w, eid = lvl.ei[pick]
        xid = lvl.new_x("blue")
        run_a = _path_segment(lvl, a, li)
        _absorb_run(lvl, xid, run_a)
        if lvl.assigned[b] == -1:
            run_b = _path_segment(lvl, b, li)
            _absorb_run(lvl, xid, run_b, bridge=(a, b, w))
        lvl.xs[xid].ei_idx.append(pick)
        x = lvl.xs[xid]
        adm = x.adm(lvl.pot)
        lvl.ctx.report("step4-adm", li * (1 - 1e-9) <= adm <= 6 * li * (1 + 1e-9),
                       f"blue-pair adm={adm} li={li}")
        dplus = sum(lvl.pot[v] for v in x.nodes) - adm + x.tree_weight
        lvl.ctx.report("step4-dplus", dplus >= -1e-9 * max(1.0, adm),
                       f"dplus={dplus}")


def _blue_nodes(lvl: _Level) -> set[int]:
    blue: set[int] = set()
    for comp in lvl.components():
        if not _is_path(lvl, comp):
            continue
        path = _order_path(lvl, comp)
        total, pos = _path_positions(lvl, path)
        if total < 6 * lvl.li:
            continue
        for idx, v in enumerate(path):
            if pos[idx] > lvl.li and total - pos[idx] + lvl.pot[v] > lvl.li:
                head = pos[idx]
                tail = total - pos[idx] + lvl.pot[v]
                if head > lvl.li and tail > lvl.li:
                    blue.add(v)
    return blue


def _order_path(lvl: _Level, comp: list[int]) -> list[int]:
    memset = set(comp)
    if len(comp) == 1:
        return list(comp)
    end = None
    for v in sorted(comp):
        d = sum(1 for u, w, sid in lvl.adj[v] if u in memset)
        if d == 1:
            end = v
            break
    if end is None:
        raise AssertionError("path component without an endpoint")
    path = [end]
    prev = -1
    cur = end
    while True:
        nxt = None
        for u, w, sid in lvl.adj[cur]:
            if u in memset and u != prev:
                nxt = u
                break
        if nxt is None:
            break
        path.append(nxt)
        prev, cur = cur, nxt
    return path


def _path_positions(lvl: _Level, path: list[int]) -> tuple[float, list[float]]:
    """pos[i] = augmented distance from path start to node i (inclusive);
    returns (total augmented length, positions)."""
    pos = [lvl.pot[path[0]]]
    for idx in range(1, len(path)):
        w = _tree_edge_weight(lvl, path[idx - 1], path[idx])
        pos.append(pos[-1] + w + lvl.pot[path[idx]])
    return pos[-1], pos


def _tree_edge_weight(lvl: _Level, a: int, b: int) -> float:
    for u, w, sid in lvl.adj[a]:
        if u == b:
            return w
    raise AssertionError("missing tree edge")


def _path_segment(lvl: _Level, center: int, radius: float) -> list[int]:
    """Contiguous unassigned run around `center` on its path, spanning
    augmented radius `radius` on each side."""
    run = [center]
    for direction in (0, 1):
        prev = center
        acc = 0.0
        nxts = [u for u, w, sid in lvl.adj[center] if lvl.assigned[u] == -1]
        if len(nxts) <= direction:
            continue
        cur = nxts[direction]
        while True:
            w = _tree_edge_weight(lvl, prev, cur)
            acc += w + lvl.pot[cur]
            if direction == 0:
                run.insert(0, cur)
            else:
                run.append(cur)
            if acc >= radius:
                break
            candidates = [u for u, w2, sid in lvl.adj[cur]
                          if u != prev and lvl.assigned[u] == -1]
            if not candidates:
                break
            prev, cur = cur, candidates[0]
    return run


def _absorb_run(lvl: _Level, xid: int, run: list[int],
                bridge: Optional[tuple[int, int, float]] = None) -> None:
    pending = [v for v in run if lvl.assigned[v] == -1]
    first = None
    for v in pending:
        if first is None:
            if bridge is not None:
                lvl.xs[xid].graph_edges.append(bridge)
            lvl.absorb(xid, v)
            first = v
        else:
            prev = None
            for u, w, sid in lvl.adj[v]:
                if lvl.assigned[u] == xid:
                    prev = (u, w)
                    break
            if prev is None:
                raise AssertionError("run is not contiguous")
            lvl.absorb(xid, v, via=(prev[0], prev[1], True))


# ---------------------------------------------------------------- step 5


def step5_paths(lvl: _Level) -> None:
    li = lvl.li
    for comp in lvl.components():
        adm = lvl.comp_adm(comp)
        if adm <= 6 * li:
            hook = _component_hook(lvl, comp)
            if hook is not None:
                other, bridge = hook
                xid = lvl.new_x("small")
                _absorb_component(lvl, xid, comp)
                lvl.merge_into(xid, other, bridge)
            else:
                # whole remaining tree: a standalone subgraph
                xid = lvl.new_x("whole")
                _absorb_component(lvl, xid, comp)
            continue
        path = _order_path(lvl, comp)
        pieces = break_long_path(lvl, path)
        # hooks must target subgraphs that existed before this path was
        # broken, never sibling pieces: resolve them before absorbing
        hooks = []
        for piece in pieces:
            seg = path[piece[0]:piece[1] + 1]
            hooks.append(_segment_hook(lvl, seg))
        for piece, hook in zip(pieces, hooks):
            seg = path[piece[0]:piece[1] + 1]
            xid = lvl.new_x("piece")
            lvl.xs[xid].endpoint_piece = piece[0] == 0 or piece[1] == len(path) - 1
            _absorb_component(lvl, xid, seg)
            if hook is not None:
                other, bridge = hook
                lvl.merge_into(xid, other, bridge)


def _component_hook(lvl: _Level, comp: list[int]):
    best = None
    for v in comp:
        for u, w, sid in lvl.adj[v]:
            other = lvl.assigned[u]
            if other != -1 and lvl.xs[other].nodes:
                key = (v, u)
                if best is None or key < best[2]:
                    best = (other, (u, v, w, True), key)
    if best is None:
        return None
    return best[0], best[1]


def _segment_hook(lvl: _Level, seg: list[int]):
    for v in (seg[0], seg[-1]):
        for u, w, sid in lvl.adj[v]:
            other = lvl.assigned[u]
            if other != -1 and lvl.xs[other].nodes:
                return other, (u, v, w, True)
    return None


def _absorb_component(lvl: _Level, xid: int, comp: list[int]) -> None:
    memset = set(comp)
    first = comp[0]
    lvl.absorb(xid, first)
    st = [first]
    seen = {first}
    while st:
        v = st.pop()
        for u, w, sid in lvl.adj[v]:
            if u in memset and u not in seen:
                seen.add(u)
                lvl.absorb(xid, u, via=(v, w, True))
                st.append(u)
    if len(seen) != len(comp):
        raise AssertionError("component absorption left nodes behind")


def break_long_path(lvl: _Level, path: list[int]) -> list[tuple[int, int]]:
    """Break a degree-2 path into index ranges with augmented diameter in
    [L_i, 7L_i]: contract to non-virtual/endpoint skeleton nodes with run
    weights, keep skeleton edges <= 2L_i, chunk kept runs into 1..3-edge
    groups, expand back, split gap ranges to [L_i, ~2L_i], then repair any
    under-length piece by merging (and re-splitting oversized merges)."""
    li = lvl.li
    n = len(path)
    total, pos = _path_positions(lvl, path)

    kept = [idx for idx, v in enumerate(path)
            if not lvl.state.virtual[v] or idx in (0, n - 1)]
    # skeleton edge weights: augmented run weight excluding endpoint nodes
    fedges = []
    for a, b in zip(kept, kept[1:]):
        wq = pos[b] - pos[a] - lvl.pot[path[b]]
        fedges.append(wq <= 2 * li)

    pieces: list[tuple[int, int]] = []
    covered = [False] * n
    run_start = None
    for t, keep in enumerate(fedges + [False]):
        if keep and run_start is None:
            run_start = t
        if not keep and run_start is not None:
            run_edges = list(range(run_start, t))   # kept-edge indices
            for lo, hi in _chunk_edges(len(run_edges)):
                ai = kept[run_edges[lo]]
                bi = kept[run_edges[hi] + 1]
                pieces.append((ai, bi))
                for x in range(ai, bi + 1):
                    covered[x] = True
            run_start = None

    # gap ranges: maximal uncovered index intervals, split to [li, ~2li]
    idx = 0
    while idx < n:
        if covered[idx]:
            idx += 1
            continue
        j = idx
        while j + 1 < n and not covered[j + 1]:
            j += 1
        pieces.extend(_split_range(lvl, path, pos, idx, j))
        idx = j + 1
    pieces.sort()

    # adjacent chunks of one skeleton run share their boundary node; clip
    # so the pieces partition the path (the left piece keeps the node)
    cleaned: list[tuple[int, int]] = []
    prev_end = -1
    for a, b in pieces:
        a = max(a, prev_end + 1)
        if a > b:
            continue
        cleaned.append((a, b))
        prev_end = b
    pieces = cleaned

    pieces = _repair_pieces(lvl, path, pos, pieces)
    flat = [x for a, b in pieces for x in range(a, b + 1)]
    if flat != list(range(n)):
        raise AssertionError("path pieces do not partition the path")
    if lvl.ctx.instrument:
        for a, b in pieces:
            adm = _range_adm(lvl, path, pos, a, b)
            lvl.ctx.report(
                "step5b-piece",
                li * (1 - 1e-9) <= adm <= 7 * li * (1 + 1e-9),
                f"piece adm={adm} li={li}",
            )
            seg = path[a:b + 1]
            if any(lvl.nonisolated[v] for v in seg):
                nonvirt = sum(1 for v in seg if not lvl.state.virtual[v])
                endpoint = a == 0 or b == n - 1
                lvl.ctx.report("step5b-good", nonvirt >= 2 or endpoint,
                               f"nonvirt={nonvirt} endpoint={endpoint}")
    return pieces


def _chunk_edges(count: int) -> list[tuple[int, int]]:
    """Split `count` consecutive edges into chunks of <= 3 (>= 2 when
    possible)."""
    if count <= 3:
        return [(0, count - 1)]
    out = []
    start = 0
    while count - start > 3:
        out.append((start, start + 1))
        start += 2
    out.append((start, count - 1))
    return out


def _split_range(lvl: _Level, path, pos, lo: int, hi: int) -> list[tuple[int, int]]:
    li = lvl.li
    out = []
    start = lo
    acc = lvl.pot[path[lo]]
    for t in range(lo + 1, hi + 1):
        step = pos[t] - pos[t - 1]
        if acc >= li:
            out.append((start, t - 1))
            start = t
            acc = lvl.pot[path[t]]
        else:
            acc += step
    out.append((start, hi))
    if len(out) >= 2:
        last_adm = _range_adm(lvl, path, pos, out[-1][0], out[-1][1])
        if last_adm < li:
            a, _ = out[-2]
            out[-2:] = [(a, hi)]
    return out


def _range_adm(lvl, path, pos, a: int, b: int) -> float:
    base = pos[b] - pos[a] + lvl.pot[path[a]]
    peak = max(lvl.pot[path[t]] for t in range(a, b + 1))
    return max(base, peak)


def _repair_pieces(lvl: _Level, path, pos, pieces):
    li = lvl.li
    guard = 2 * len(pieces) + 8
    while guard:
        guard -= 1
        bad = None
        for t, (a, b) in enumerate(pieces):
            if _range_adm(lvl, path, pos, a, b) < li * (1 - 1e-12):
                bad = t
                break
        if bad is None or len(pieces) == 1:
            break
        # merge toward the side holding this piece's light-edge partner
        if bad + 1 < len(pieces):
            a, b = pieces[bad][0], pieces[bad + 1][1]
            pieces[bad:bad + 2] = [(a, b)]
        else:
            a, b = pieces[bad - 1][0], pieces[bad][1]
            pieces[bad - 1:bad + 1] = [(a, b)]
        t = pieces.index((a, b))
        if _range_adm(lvl, path, pos, a, b) > 7 * li:
            pieces[t:t + 1] = _split_range(lvl, path, pos, a, b)
    return pieces


# ---------------------------------------------------------------- finish


def _force_min_adm(lvl: _Level) -> None:
    """Last-resort: merge any under-length subgraph into a neighbor."""
    guard = len(lvl.xs) + 4
    while guard:
        guard -= 1
        worst = None
        for xid, x in enumerate(lvl.xs):
            if not x.nodes:
                continue
            if x.adm(lvl.pot) < lvl.li * (1 - 1e-12):
                worst = xid
                break
        if worst is None:
            break
        hook = _adjacent_subgraph(lvl, worst, prefer="any")
        if hook is None:
            if sum(1 for x in lvl.xs if x.nodes) > 1:
                lvl.ctx.report("min-adm", False,
                               f"isolated short subgraph size={len(lvl.xs[worst].nodes)}")
            break
        other, bridge = hook
        lvl.merge_into(worst, other, bridge)


def _classify(lvl: _Level, degenerate: bool) -> None:
    tau = lvl.ctx.tau_high
    for x in lvl.xs:
        if not x.nodes:
            continue
        if degenerate:
            x.kind = "low-"
        elif any(lvl.deg[v] >= tau for v in x.nodes):
            x.kind = "high"
        elif x.step == "piece" and not x.endpoint_piece:
            x.kind = "low-"
        else:
            x.kind = "low+"


def select_level_edges(lvl: _Level) -> tuple[set[int], list[int]]:
    """Three selection steps: subgraph-internal edges, an unweighted
    (2k-1)-spanner among high nodes, and everything at low nodes."""
    tau = lvl.ctx.tau_high
    picked: set[int] = set()
    c1 = c2 = c3 = 0
    for x in lvl.xs:
        for idx in x.ei_idx:
            eid = lvl.ei[idx][3]
            if eid not in picked:
                c1 += 1
            picked.add(eid)
    high = sorted(v for v in range(lvl.count) if lvl.deg[v] >= tau)
    if high:
        hidx = {v: t for t, v in enumerate(high)}
        kedges = []
        kmap = {}
        for a, b, w, eid in lvl.ei:
            if a in hidx and b in hidx:
                key = (hidx[a], hidx[b]) if hidx[a] < hidx[b] else (hidx[b], hidx[a])
                kedges.append(key)
                kmap[key] = eid
        kg = UnweightedGraph(len(high), kedges)
        for a, b in hz_spanner(kg, lvl.ctx.k):
            eid = kmap[(a, b) if (a, b) in kmap else (b, a)]
            if eid not in picked:
                c2 += 1
            picked.add(eid)
    for a, b, w, eid in lvl.ei:
        if lvl.deg[a] < tau or lvl.deg[b] < tau:
            if eid not in picked:
                c3 += 1
            picked.add(eid)
    return picked, [c1, c2, c3]


def _finish_level(lvl: _Level, sigma: int, i: int, degenerate: bool,
                  picked: set[int], counts: list[int]):
    ctx = lvl.ctx
    state = lvl.state
    live = [(xid, x) for xid, x in enumerate(lvl.xs) if x.nodes]
    remap = {xid: t for t, (xid, x) in enumerate(live)}
    n_new = len(live)

    ok_p1 = all(lvl.assigned[v] != -1 for v in range(lvl.count))
    ctx.report("p1-partition", ok_p1, f"sigma={sigma} i={i}")

    adm = [0.0] * n_new
    virtual = [True] * n_new
    par_eid = [-1] * n_new
    tree_w_inside = 0.0
    dplus_ok = True
    good_ok = True
    y_count = sum(1 for v in range(lvl.count) if lvl.nonisolated[v])
    for t, (xid, x) in enumerate(live):
        adm[t] = x.adm(lvl.pot)
        vs = [state.virtual[v] for v in x.nodes]
        virtual[t] = all(vs)
        if virtual[t]:
            peids = {state.par_eid[v] for v in x.nodes}
            if len(peids) != 1:
                raise AssertionError("virtual subgraph spans several parent paths")
            par_eid[t] = peids.pop()
        tree_w_inside += x.tree_weight
        dplus = sum(lvl.pot[v] for v in x.nodes) - adm[t] + x.tree_weight
        if dplus < -1e-9 * max(1.0, adm[t]):
            dplus_ok = False
        if not _is_good(lvl, x):
            good_ok = False
        upper = ctx.gconst * lvl.li * (1 + 1e-9)
        lower = lvl.li * (1 - 1e-9) if n_new > 1 else 0.0
        ctx.report("p3-adm", lower <= adm[t] <= upper,
                   f"sigma={sigma} i={i} step={x.step} adm={adm[t]} li={lvl.li}")
        size_floor = 1.0 / (4 * ctx.eps)
        ctx.report("p2-size-warning", len(x.nodes) >= min(size_floor, lvl.count),
                   f"|V(X)|={len(x.nodes)}")
    ctx.report("dplus-nonnegative", dplus_ok, f"sigma={sigma} i={i}")
    ctx.report("goodness", good_ok, f"sigma={sigma} i={i}")

    if not degenerate:
        sep_ok = True
        tau = ctx.tau_high
        for a, b, w, eid in lvl.ei:
            ka = "high" if lvl.deg[a] >= tau else lvl.xs[lvl.assigned[a]].kind
            kb = "high" if lvl.deg[b] >= tau else lvl.xs[lvl.assigned[b]].kind
            if {ka, kb} == {"high", "low-"} or (ka == kb == "low-"):
                sep_ok = False
        ctx.report("low-minus-separation", sep_ok, f"sigma={sigma} i={i}")

    n_before = sum(1 for v in range(lvl.count) if not state.virtual[v])
    n_after = sum(1 for v in virtual if not v)
    ctx.report(
        "n-reduction", n_before - n_after >= y_count / 2,
        f"sigma={sigma} i={i} before={n_before} after={n_after} y={y_count}",
    )

    phi_before = sum(lvl.pot)
    phi_after = sum(adm)
    a_i = sum(ctx.g.edges[eid][2] for eid in picked) if degenerate else 0.0

    piece_of = [0] * lvl.count
    for xid, x in enumerate(lvl.xs):
        if not x.nodes:
            continue
        for v in x.nodes:
            piece_of[v] = remap[xid]
    tree = _contract(state.tree, piece_of, n_new) if n_new > 1 else []
    new_state = ClassState(
        count=n_new, pot=adm, virtual=virtual, par_eid=par_eid, tree=tree,
        cl_of_sub=[piece_of[c] for c in state.cl_of_sub], scale=lvl.li,
    )
    row = {
        "sigma": sigma, "i": i, "v_nodes": lvl.count, "e_edges": len(lvl.ei),
        "y_nodes": y_count, "n_nodes": n_after, "phi": phi_before,
        "delta": phi_before - phi_after, "a_i": a_i,
        "step_edge_counts": counts, "degenerate": degenerate,
    }
    if ctx.instrument:
        _cycle_property_check(lvl)
    return row, new_state


def _cycle_property_check(lvl: _Level) -> None:
    """Every virtual node on a level edge's fundamental tree cycle has a
    parent MST edge no heavier than the level edge."""
    if not lvl.ei:
        return
    parent: list[int] = [-2] * lvl.count
    order = [0]
    parent[0] = -1
    pw = [0.0] * lvl.count
    st = [0]
    while st:
        v = st.pop()
        for u, w, sid in lvl.adj[v]:
            if parent[u] == -2:
                parent[u] = v
                pw[u] = w
                order.append(u)
                st.append(u)
    depth = [0] * lvl.count
    for v in order[1:]:
        depth[v] = depth[parent[v]] + 1
    ok = True
    for a, b, w, eid in lvl.ei:
        x, y = a, b
        while x != y:
            if depth[x] < depth[y]:
                x, y = y, x
            if lvl.state.virtual[x]:
                peid = lvl.state.par_eid[x]
                if peid >= 0 and not (
                    _mst_weight_of(lvl.ctx, peid) <= w * (1 + 1e-9)
                ):
                    ok = False
            x = parent[x]
        if lvl.state.virtual[x]:
            peid = lvl.state.par_eid[x]
            if peid >= 0 and not (_mst_weight_of(lvl.ctx, peid) <= w * (1 + 1e-9)):
                ok = False
    lvl.ctx.report("cycle-property", ok, f"edges={len(lvl.ei)}")


def _mst_weight_of(ctx: StepContext, peid: int) -> float:
    weights = getattr(ctx.sub, "_parent_weights", None)
    if weights is None:
        acc: dict[int, float] = {}
        for a, b, w, pe in ctx.sub.edges:
            acc[pe] = acc.get(pe, 0.0) + w
        weights = [acc.get(t, 0.0) for t in range(max(acc) + 1)] if acc else []
        ctx.sub._parent_weights = weights
    return weights[peid]
