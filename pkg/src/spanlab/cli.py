"""Command-line surface: gen | build | verify | bench.

Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .generators import generate
from .graphs import GraphFormatError, WeightedGraph, load_graph, save_graph
from .light import build_light
from .linear import build_linear
from .oracle import greedy_spanner, spanner_metrics, verify_stretch
from .pm import build_pm
from .spanner import Spanner, graph_hash, load_spanner

ALGOS = ("greedy", "hz", "pm", "linear", "light")


def _build(algo: str, g: WeightedGraph, k: int, eps: float,
           nominal: bool, instrument: bool) -> Spanner:
    if algo == "pm":
        return build_pm(g, k, eps, nominal_eps=nominal, instrument=instrument)
    if algo == "linear":
        return build_linear(g, k, eps, nominal_eps=nominal, instrument=instrument)
    if algo == "light":
        return build_light(g, k, eps, nominal_eps=nominal, instrument=instrument)
    if algo == "greedy":
        sp = greedy_spanner(g, (2 * k - 1) * (1 + eps))
        sp.k, sp.eps = k, eps
        return sp
    if algo == "hz":
        # weights ignored: hop-based spanner of the unit-weight view
        from .hz import UnweightedGraph, hz_spanner

        ug = UnweightedGraph(g.n, [(u, v) for u, v, _ in g.edges])
        wmap = {(min(u, v), max(u, v)): w for u, v, w in g.edges}
        edges = sorted((u, v, wmap[(u, v)]) for u, v in hz_spanner(ug, k))
        return Spanner(algo="hz", k=k, eps=eps, n=g.n, edges=edges,
                       source_hash=graph_hash(g))
    raise ValueError(f"unknown algorithm {algo!r}")


def cmd_gen(args) -> int:
    g = generate(args.type, args.n, args.seed, p=args.p, m=args.m,
                 law=args.weights, wmax=args.wmax)
    save_graph(g, args.output,
               header_comment=f"gen type={args.type} n={args.n} seed={args.seed} "
                              f"weights={args.weights}")
    print(f"wrote {args.output}: n={g.n} m={g.m}")
    return 0


def cmd_build(args) -> int:
    g = load_graph(args.input, args.format)
    if g.collapsed_count or g.selfloop_count:
        print(f"ingest: collapsed {g.collapsed_count} multi-edges, "
              f"dropped {g.selfloop_count} self-loops", file=sys.stderr)
    t0 = time.perf_counter()
    sp = _build(args.algo, g, args.k, args.eps, args.nominal_eps, args.instrument)
    elapsed = time.perf_counter() - t0
    sp.save(args.output)
    if args.metrics:
        rep = spanner_metrics(g, sp)
        with open(args.metrics, "w", encoding="utf-8") as fh:
            fh.write(rep.to_json() + "\n")
    if args.instrument and args.instrument_out:
        with open(args.instrument_out, "w", encoding="utf-8") as fh:
            for row in sp.levels:
                fh.write(json.dumps(row) + "\n")
    print(f"{args.algo}: kept {sp.m}/{g.m} edges in {elapsed:.3f}s "
          f"-> {args.output}")
    return 0


def cmd_verify(args) -> int:
    g = load_graph(args.graph, args.format)
    sp = load_spanner(args.spanner)
    t = args.t if args.t is not None else (2 * sp.k - 1) * (1 + sp.eps)
    report = verify_stretch(g, sp, t)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    status = "PASS" if report.ok else "FAIL"
    print(f"{status}: max stretch {report.max_stretch:.6f} vs target {t:.6f}"
          + (f" witness={report.witness}" if report.witness else ""))
    return 0 if report.ok else 1


def _bench_cell(cell) -> dict:
    algo, n, k, eps, seed, law = cell
    g = generate("gnp", n, seed, p=min(1.0, 8.0 / n), law=law, wmax=2.0)
    t0 = time.perf_counter()
    sp = _build(algo, g, k, eps, nominal=False, instrument=False)
    secs = time.perf_counter() - t0
    rep = verify_stretch(g, sp, (2 * k - 1) * (1 + eps))
    met = spanner_metrics(g, sp)
    return {
        "algo": algo, "n": n, "m": g.m, "k": k, "eps": eps,
        "edges": sp.m, "sparsity": round(met.sparsity, 6),
        "lightness": round(met.lightness, 6),
        "max_stretch": round(rep.max_stretch, 9),
        "ops": sum(sp.ops.values()) if sp.ops else 0,
        "seconds": round(secs, 6),
    }


def _dsu_bench(seed: int) -> str:
    """Amortized-cost evidence for the static-tree engine: op count over
    (m+n) across a ladder of sizes, one CSV row per n."""
    import random

    from .dsu import StaticTreeIndex, StaticTreeUF

    rng = random.Random(seed)
    lines = ["engine,n,ops,m_plus_n,ratio"]
    for exp in range(10, 17):
        n = 2 ** exp
        parent = [-1] + [rng.randrange(v) for v in range(1, n)]
        uf = StaticTreeUF(StaticTreeIndex(parent))
        mops = 0
        order = list(range(1, n))
        rng.shuffle(order)
        for v in order:
            uf.link(v)
            mops += 1
            if mops % 2 == 0:
                uf.find(rng.randrange(n))
                mops += 1
        for _ in range(n // 2):
            uf.find(rng.randrange(n))
            mops += 1
        lines.append(
            f"static-tree,{n},{uf.cost},{mops + n},{uf.cost / (mops + n):.4f}"
        )
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    if args.dsu:
        text = _dsu_bench(args.seed)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    cells = [
        (algo, n, k, eps, args.seed + idx, args.weights)
        for idx, (algo, n, k, eps) in enumerate(
            (algo, n, k, eps)
            for algo in args.algos.split(",")
            for n in (int(x) for x in args.ns.split(","))
            for k in (int(x) for x in args.ks.split(","))
            for eps in (float(x) for x in args.epss.split(","))
        )
    ]
    for cell in cells:
        if cell[0] not in ALGOS:
            print(f"unknown algo {cell[0]!r}", file=sys.stderr)
            return 2
    workers = int(os.environ.get("SPANNER_THREADS", "1"))
    rows: list[dict]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_cell, cells))
    else:
        rows = [_bench_cell(cell) for cell in cells]
    header = ["algo", "n", "m", "k", "eps", "edges", "sparsity", "lightness",
              "max_stretch", "ops", "seconds"]
    lines = [",".join(header)]
    lines += [",".join(str(row[h]) for h in header) for row in rows]
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spanlab",
                                 description="graph spanner construction toolkit")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a graph file")
    g.add_argument("--type", choices=("gnp", "gnm", "grid", "geometric"),
                   default="gnp")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float, default=None)
    g.add_argument("--m", type=int, default=None)
    g.add_argument("--weights", choices=("unit", "uniform", "loguniform"),
                   default="uniform")
    g.add_argument("--wmax", type=float, default=100.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="build a spanner")
    b.add_argument("--algo", choices=ALGOS, required=True)
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--eps", type=float, default=0.25)
    b.add_argument("--nominal-eps", action="store_true",
                   help="skip the internal eps down-scaling (experiments)")
    b.add_argument("--instrument", action="store_true")
    b.add_argument("--instrument-out", default=None,
                   help="write per-level instrumentation JSON lines here")
    b.add_argument("--format", choices=("edge-list", "dimacs-gr"),
                   default="edge-list")
    b.add_argument("-i", "--input", required=True)
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--metrics", default=None, help="write metrics JSON here")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="verify a spanner against its graph")
    v.add_argument("-g", "--graph", required=True)
    v.add_argument("-s", "--spanner", required=True)
    v.add_argument("-t", type=float, default=None,
                   help="target stretch; defaults to (2k-1)(1+eps) from the header")
    v.add_argument("--format", choices=("edge-list", "dimacs-gr"),
                   default="edge-list")
    v.add_argument("--report", default=None)
    v.set_defaults(func=cmd_verify)

    be = sub.add_parser("bench", help="sweep a grid and emit CSV")
    be.add_argument("--algos", default="pm,linear")
    be.add_argument("--ns", default="128,256")
    be.add_argument("--ks", default="2")
    be.add_argument("--epss", default="0.25")
    be.add_argument("--weights", choices=("unit", "uniform", "loguniform"),
                    default="uniform")
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--dsu", action="store_true",
                    help="emit union-find amortized-cost evidence instead")
    be.add_argument("-o", "--output", default=None)
    be.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (GraphFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
