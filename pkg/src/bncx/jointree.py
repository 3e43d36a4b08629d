"""Jointree construction, shape normalization and calibration."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import StructuralError
from .factor import Factor, multiply, multiply_all, project
from .network import BayesNet, greedy_minfill


@dataclass(frozen=True, eq=False)
class Jointree:
    """Tree of clusters.

    ``assignment[n]`` lists the variables whose CPT is placed on node ``n``;
    ``families[v]`` is the scope of the CPT of ``v``.  ``marginals`` is
    ``None`` until :func:`calibrate` has run.
    """

    clusters: tuple[frozenset, ...]
    edges: tuple[tuple[int, int], ...]
    cards: tuple[int, ...]
    families: tuple[frozenset, ...]
    assignment: tuple[tuple[int, ...], ...]
    marginals: tuple[Factor, ...] | None = None
    order: tuple[int, ...] = ()
    _adj: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj: list[list[int]] = [[] for _ in self.clusters]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(x)) for x in adj))

    def __len__(self):
        return len(self.clusters)

    def neighbors(self, n: int) -> tuple[int, ...]:
        return self._adj[n]

    def degree(self, n: int) -> int:
        return len(self._adj[n])

    def separator(self, a: int, b: int) -> frozenset:
        return self.clusters[a] & self.clusters[b]

    @property
    def width(self) -> int:
        return max((len(c) for c in self.clusters), default=0) - 1

    @property
    def calibrated(self) -> bool:
        return self.marginals is not None

    def nodes_containing(self, v: int) -> list[int]:
        return [n for n, c in enumerate(self.clusters) if v in c]


@dataclass(frozen=True)
class WidthReport:
    width: int
    cluster_sizes: tuple[int, ...]
    order: tuple[int, ...]


def width_report(jt: Jointree) -> WidthReport:
    return WidthReport(jt.width, tuple(len(c) for c in jt.clusters), jt.order)


def minfill_order(net: BayesNet) -> list[int]:
    """Greedy min-fill elimination order on the moral graph (ties: lowest id)."""
    return greedy_minfill(net.moral_graph())


def induced_width(net: BayesNet, order: Sequence[int]) -> int:
    """Largest elimination cluster minus one along ``order``."""
    g = {v: set(nb) for v, nb in net.moral_graph().items()}
    width = -1 if not order else 0
    for v in order:
        nb = g.pop(v)
        width = max(width, len(nb))
        for a in nb:
            g[a].discard(v)
            g[a] |= nb - {a}
    return width


def _assign(clusters: Sequence[frozenset], families: Sequence[frozenset]) -> list[list[int]]:
    assignment: list[list[int]] = [[] for _ in clusters]
    for v, fam in enumerate(families):
        homes = [n for n, c in enumerate(clusters) if fam <= c]
        if not homes:
            raise StructuralError(f"family of variable {v} is in no cluster")
        assignment[min(homes, key=lambda n: (len(clusters[n]), n))].append(v)
    return assignment


def from_clusters(
    net: BayesNet, clusters: Sequence[Iterable[int]], edges: Sequence[tuple[int, int]]
) -> Jointree:
    """Jointree with explicitly given clusters and edges (validated)."""
    clusters = tuple(frozenset(c) for c in clusters)
    families = tuple(net.family(v) for v in range(len(net)))
    jt = Jointree(
        clusters,
        tuple((min(a, b), max(a, b)) for a, b in edges),
        net.cards,
        families,
        tuple(tuple(a) for a in _assign(clusters, families)),
    )
    problems = validate_jointree(jt, net)
    if problems:
        raise StructuralError("; ".join(problems))
    return jt


def build_jointree(net: BayesNet, order: Sequence[int] | None = None) -> Jointree:
    """Jointree from an elimination order (default: min-fill).

    Each eliminated variable yields the cluster of itself and its current
    neighbours; a cluster hangs below the cluster of the first later-
    eliminated variable it contains.  Clusters contained in a neighbour are
    then merged into it.
    """
    if order is None:
        order = minfill_order(net)
    order = list(order)
    if sorted(order) != list(range(len(net))):
        raise StructuralError("order must be a permutation of the variables")
    pos = {v: k for k, v in enumerate(order)}
    g = {v: set(nb) for v, nb in net.moral_graph().items()}
    clusters = []
    for v in order:
        nb = g.pop(v)
        clusters.append(frozenset(nb | {v}))
        for a in nb:
            g[a].discard(v)
            g[a] |= nb - {a}
    adj: dict[int, set[int]] = {k: set() for k in range(len(order))}
    comp_roots = []
    for k, v in enumerate(order):
        rest = clusters[k] - {v}
        if rest:
            p = min(pos[u] for u in rest)
            adj[k].add(p)
            adj[p].add(k)
        else:
            comp_roots.append(k)
    for r in comp_roots[1:]:
        adj[r].add(comp_roots[0])
        adj[comp_roots[0]].add(r)

    alive = dict(enumerate(clusters))
    changed = True
    while changed:
        changed = False
        for a in sorted(alive):
            b = next((b for b in sorted(adj[a]) if alive[a] <= alive[b]), None)
            if b is None:
                continue
            for c in adj[a] - {b}:
                adj[c].discard(a)
                adj[c].add(b)
                adj[b].add(c)
            adj[b].discard(a)
            del adj[a], alive[a]
            changed = True
            break
    ids = {old: new for new, old in enumerate(sorted(alive))}
    cl = tuple(alive[old] for old in sorted(alive))
    edges = tuple(sorted({(min(ids[a], ids[b]), max(ids[a], ids[b])) for a in adj for b in adj[a]}))
    families = tuple(net.family(v) for v in range(len(net)))
    return Jointree(
        cl, edges, net.cards, families,
        tuple(tuple(a) for a in _assign(cl, families)), order=tuple(order),
    )


def _components(n: int, edges) -> int:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(x) for x in range(n)})


def validate_jointree(jt: Jointree, net: BayesNet | None = None, rtol: float = 1e-9) -> list[str]:
    """Problems found in ``jt`` (empty list when every invariant holds)."""
    problems = []
    n = len(jt)
    if n == 0:
        return ["jointree has no nodes"]
    if len(jt.edges) != n - 1 or _components(n, jt.edges) != 1:
        problems.append("edges do not form a tree")
        return problems
    fams = jt.families if net is None else tuple(net.family(v) for v in range(len(net)))
    for v, fam in enumerate(fams):
        if not any(fam <= c for c in jt.clusters):
            problems.append(f"family of variable {v} is in no cluster")
    for v in range(len(jt.cards)):
        holders = jt.nodes_containing(v)
        if len(holders) > 1:
            sub = [(a, b) for a, b in jt.edges if v in jt.clusters[a] and v in jt.clusters[b]]
            if len(sub) != len(holders) - 1 or _components_sub(holders, sub) != 1:
                problems.append(f"running intersection fails for variable {v}")
    for node, vars_ in enumerate(jt.assignment):
        for v in vars_:
            if not jt.families[v] <= jt.clusters[node]:
                problems.append(f"CPT of {v} assigned to node {node} that misses its family")
    assigned = sorted(v for a in jt.assignment for v in a)
    if assigned != list(range(len(jt.families))):
        problems.append("every CPT must be assigned to exactly one node")
    if jt.marginals is not None:
        for node, phi in enumerate(jt.marginals):
            if set(phi.scope) != set(jt.clusters[node]):
                problems.append(f"marginal of node {node} is not over its cluster")
        if not problems:
            for a, b in jt.edges:
                sep = jt.separator(a, b)
                pa = project(jt.marginals[a], sep).values
                pb = project(jt.marginals[b], sep).values
                if not np.allclose(pa, pb, rtol=rtol, atol=1e-15):
                    problems.append(f"marginals disagree on separator of edge {a}-{b}")
    return problems


def _components_sub(nodes, edges) -> int:
    index = {x: k for k, x in enumerate(nodes)}
    return _components(len(nodes), [(index[a], index[b]) for a, b in edges])


# --------------------------------------------------------------------------
# shape normalization


class _Work:
    """Mutable copy of a jointree used while reshaping it."""

    def __init__(self, jt: Jointree):
        self.clusters = [set(c) for c in jt.clusters]
        self.adj = [set(jt.neighbors(n)) for n in range(len(jt))]
        self.assignment = [list(a) for a in jt.assignment]
        self.marg = list(jt.marginals) if jt.marginals is not None else None
        self.jt = jt

    def add_node(self, cluster, source: int) -> int:
        self.clusters.append(set(cluster))
        self.adj.append(set())
        self.assignment.append([])
        if self.marg is not None:
            self.marg.append(project(self.marg[source], cluster))
        return len(self.clusters) - 1

    def link(self, a, b):
        self.adj[a].add(b)
        self.adj[b].add(a)

    def unlink(self, a, b):
        self.adj[a].discard(b)
        self.adj[b].discard(a)

    def drop_var(self, n, v):
        self.clusters[n].discard(v)
        if self.marg is not None:
            self.marg[n] = project(self.marg[n], self.clusters[n])

    def freeze(self) -> Jointree:
        edges = tuple(sorted({(min(a, b), max(a, b)) for a in range(len(self.adj)) for b in self.adj[a]}))
        return replace(
            self.jt,
            clusters=tuple(frozenset(c) for c in self.clusters),
            edges=edges,
            assignment=tuple(tuple(sorted(a)) for a in self.assignment),
            marginals=tuple(self.marg) if self.marg is not None else None,
        )


def normalize_shape(
    jt: Jointree, features: Iterable[int], target: int | None = None
) -> Jointree:
    """Make every feature live in exactly one leaf and every node have at most
    three neighbours, without increasing the width.

    A feature found in several clusters is removed from all but the node
    holding its CPT.  If that node is internal, shares the feature with
    other features, or (when ``target`` is given) contains the target, the
    feature moves to a new leaf whose cluster is the feature's family.
    Nodes of degree above three are split repeatedly: the highest-degree node
    hands two neighbours to a new node whose cluster is its own cluster
    restricted to those neighbours.  Calibrated marginals are carried along
    by projection.
    """
    features = sorted(set(features))
    w = _Work(jt)
    home = {}
    for n, vars_ in enumerate(jt.assignment):
        for v in vars_:
            home[v] = n
    for f in features:
        h = home[f]
        for n in jt.nodes_containing(f):
            if n == h:
                continue
            if any(f in jt.families[u] for u in w.assignment[n]):
                raise StructuralError(f"feature {f} occurs in another variable's family")
            w.drop_var(n, f)
    for f in features:
        h = home[f]
        if any(f in jt.families[u] and u != f for u in w.assignment[h]):
            raise StructuralError(f"feature {f} occurs in another variable's family")
        crowded = any(g in w.clusters[h] for g in features if g != f)
        if len(w.adj[h]) <= 1 and not crowded and (target is None or target not in w.clusters[h]):
            continue
        leaf = w.add_node(jt.families[f], h)
        w.assignment[h].remove(f)
        w.assignment[leaf].append(f)
        w.link(h, leaf)
        w.drop_var(h, f)

    while True:
        busy = [n for n in range(len(w.adj)) if len(w.adj[n]) > 3]
        if not busy:
            break
        n = min(busy, key=lambda x: (-len(w.adj[x]), x))
        nbrs = sorted(w.adj[n])
        best = None
        for i_a in range(len(nbrs)):
            for i_b in range(i_a + 1, len(nbrs)):
                a, b = nbrs[i_a], nbrs[i_b]
                shared = w.clusters[n] & (w.clusters[a] | w.clusters[b])
                key = (len(shared), a, b)
                if best is None or key < best[0]:
                    best = (key, a, b, shared)
        _, a, b, shared = best
        m = w.add_node(shared, n)
        w.unlink(n, a)
        w.unlink(n, b)
        w.link(m, a)
        w.link(m, b)
        w.link(n, m)
    return w.freeze()


# --------------------------------------------------------------------------
# calibration


def _rooted(jt: Jointree, root: int = 0) -> tuple[list[int], list[int]]:
    parent = [-1] * len(jt)
    order = [root]
    seen = {root}
    for n in order:
        for m in jt.neighbors(n):
            if m not in seen:
                seen.add(m)
                parent[m] = n
                order.append(m)
    return order, parent


def calibrate(jt: Jointree, net: BayesNet) -> Jointree:
    """Two-pass message passing; node marginals become ``P(cluster)``."""
    pots = []
    for n, vars_ in enumerate(jt.assignment):
        # a unit factor over the cluster keeps variables without a CPT here in scope
        scope = tuple(sorted(jt.clusters[n]))
        unit = Factor(scope, tuple(jt.cards[v] for v in scope), np.ones([jt.cards[v] for v in scope]))
        pots.append(multiply_all([unit] + [net.cpts[v] for v in vars_]))
    order, parent = _rooted(jt)
    msg: dict[tuple[int, int], Factor] = {}

    def incoming(n, skip=None):
        out = pots[n]
        for m in jt.neighbors(n):
            if m != skip:
                out = multiply(out, msg[(m, n)])
        return out

    for n in reversed(order[1:]):
        p = parent[n]
        msg[(n, p)] = project(incoming(n, skip=p), jt.separator(n, p))
    for n in order:
        for c in jt.neighbors(n):
            if c != parent[n]:
                msg[(n, c)] = project(incoming(n, skip=c), jt.separator(n, c))
    marginals = []
    for n in range(len(jt)):
        phi = incoming(n)
        if set(phi.scope) != set(jt.clusters[n]):
            raise StructuralError(f"node {n}: potentials do not cover its cluster")
        marginals.append(phi)
    return replace(jt, marginals=tuple(marginals))


def compile_jointree(net: BayesNet, features: Iterable[int], target: int | None = None) -> Jointree:
    """Min-fill jointree, normalized for ``features`` and calibrated."""
    jt = build_jointree(net)
    return calibrate(normalize_shape(jt, features, target), net)
