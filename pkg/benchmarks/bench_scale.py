"""Compile every class of a network with 16 leaf features for several targets.

    python3 benchmarks/bench_scale.py [network.bif] [--targets N] [--timeout S]

Without a BIF file, a seeded synthetic network of the same size as the
common 76-variable troubleshooting benchmark (mostly binary, 16 leaves) is
used.  One ``key=value`` record per target, then the average compilation
width.
"""

import argparse
import time

import numpy as np

from bncx.bif import read_bif
from bncx.compiler import compile_class_formula
from bncx.errors import CapExceeded
from bncx.ftree import compilation_width, extract_ftree
from bncx.jointree import compile_jointree
from bncx.network import BayesNet, ClassifierSpec


def synthetic(seed=0, n=76, n_roots=14, n_leaves=16, window=8):
    """Layered random DAG: each non-root node draws 1-3 parents among the
    ``window`` preceding nodes; the last ``n_leaves`` nodes are the leaves."""
    rng = np.random.default_rng(seed)
    inner = n - n_leaves
    parents = [[] for _ in range(n)]
    for v in range(n_roots, inner):
        pool = list(range(max(0, v - window), v))
        k = int(rng.integers(1, min(3, len(pool)) + 1))
        parents[v] = sorted(int(p) for p in rng.choice(pool, size=k, replace=False))
    # every inner node needs a child so that only the tail nodes are leaves
    orphans = [v for v in range(inner) if not any(v in pa for pa in parents)]
    for j, v in enumerate(range(inner, n)):
        pool = orphans[j::n_leaves] or [int(rng.integers(n_roots, inner))]
        parents[v] = sorted(set(pool[:2]))
    for v in orphans:
        if not any(v in pa for pa in parents):
            parents[v + 1].append(v)
    rows = []
    for v in range(n):
        k = 3 if rng.random() < 0.15 else 2
        states = tuple(f"s{i}" for i in range(k))
        rows.append([f"N{v}", states, [f"N{p}" for p in sorted(set(parents[v]))], k])
    cards = {r[0]: r[3] for r in rows}
    spec = []
    for name, states, pa, k in rows:
        shape = [cards[p] for p in pa] + [k]
        table = rng.dirichlet(np.ones(k), size=int(np.prod(shape[:-1], dtype=np.int64)))
        table = np.maximum(table, 1e-3)
        table /= table.sum(axis=1, keepdims=True)
        spec.append((name, states, pa, table.reshape(shape)))
    return BayesNet.from_tables(spec, name=f"synthetic-{seed}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("network", nargs="?")
    ap.add_argument("--targets", type=int, default=10)
    ap.add_argument("--timeout", type=float, default=300.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    net = read_bif(args.network) if args.network else synthetic(args.seed)
    leaves = net.leaves()
    targets = [v for v in net.roots() if v not in leaves][: args.targets]
    print(f"network={net.name} variables={len(net)} leaves={len(leaves)} targets={len(targets)}")
    widths = []
    for t in targets:
        spec = ClassifierSpec(net, t, tuple(v for v in leaves if v != t))
        start = time.perf_counter()
        status = "ok"
        nodes = 0
        try:
            ft = extract_ftree(compile_jointree(net, spec.features, t), spec)
            rep = compilation_width(ft)
            widths.append(rep.omega_T)
            deadline = start + args.timeout
            for i in range(spec.num_classes):
                comp = compile_class_formula(spec, ft, i, timeout=max(0.0, deadline - time.perf_counter()))
                nodes += comp.stats.nodes
        except CapExceeded as exc:
            status = "timeout" if "time" in str(exc) else "cap"
            rep = None
        secs = time.perf_counter() - start
        w = f"omega={rep.omega} omega_T={rep.omega_T}" if rep else "omega= omega_T="
        print(f"target={net.variables[t].name} status={status} {w} nodes={nodes} seconds={secs:.3f}")
    if widths:
        print(f"average_omega_T={np.mean(widths):.2f}")


if __name__ == "__main__":
    main()
