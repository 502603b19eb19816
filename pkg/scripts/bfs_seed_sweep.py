"""Run the bundled BFS on one graph across many schedule seeds.

Usage: python3 scripts/bfs_seed_sweep.py [GRAPH] [--src N] [--seeds N]

GRAPH is an edge-list file (``N M`` header, then ``u v`` lines); without it
a random connected graph is generated from --graph-seed. Each run's levels
are compared with a plain queue-based BFS and a one-line summary per
resident-thread count is printed. Exit status 1 if any run disagrees.
"""

from __future__ import annotations

import argparse
import random
import sys
from collections import Counter, deque

from irgl import corpus
from irgl.frontend import parse_file
from irgl.interp import INF, Graph, Machine, SimConfig, load_graph


def reference_levels(g: Graph, src: int) -> list:
    level = [INF] * g.nnodes
    level[src] = 0
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in g.col[g.row_offsets[u]:g.row_offsets[u + 1]]:
            if level[v] == INF:
                level[v] = level[u] + 1
                queue.append(v)
    return level


def random_graph(rng: random.Random, n: int) -> Graph:
    edges = {(rng.randrange(i), i) for i in range(1, n)}
    while len(edges) < 2 * n:
        u, v = sorted(rng.sample(range(n), 2))
        edges.add((u, v))
    return Graph.from_edges(n, sorted(edges))


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("graph", nargs="?", help="edge-list file")
    p.add_argument("--src", type=int, default=0)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--nodes", type=int, default=64, help="size of the generated graph")
    p.add_argument("--graph-seed", type=int, default=0)
    p.add_argument("--resident-threads", type=int, nargs="+", default=[8, 32, 128])
    args = p.parse_args(argv)

    g = load_graph(args.graph) if args.graph else random_graph(random.Random(args.graph_seed), args.nodes)
    expected = reference_levels(g, args.src)
    module = parse_file(str(corpus.path("bfs")))
    failures = 0
    for resident in args.resident_threads:
        rounds: Counter = Counter()
        for seed in range(args.seeds):
            m = Machine(module, SimConfig(resident_threads=resident, schedule_seed=seed))
            out = m.run_host("main", dict(graph=g, src=args.src))
            rounds[tuple(m.stats.iterate_rounds)] += 1
            if out["level"] != expected:
                failures += 1
                print(f"mismatch: resident={resident} seed={seed}", file=sys.stderr)
        print(f"resident={resident:4d} seeds={args.seeds} rounds={dict(rounds)}")
    print(f"nodes={g.nnodes} src={args.src} max level={max(x for x in expected if x != INF)} failures={failures}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
