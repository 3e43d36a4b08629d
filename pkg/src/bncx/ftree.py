"""Feature trees: rooted, oriented sub-trees of a calibrated jointree."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import StructuralError
from .factor import Factor, project
from .jointree import Jointree
from .network import ClassifierSpec

NONE = -1


@dataclass(frozen=True, eq=False)
class FTree:
    """A binary f-tree.

    Nodes are numbered ``0..n-1``; ``jt_node[q]`` is the originating jointree
    node (``-1`` for a node inserted to keep the root binary).  ``sep[q]`` is
    the separator with the parent; the root gets ``{target}``, which never
    splits features.  A node with a single child keeps it as ``right[q]``
    and has ``left[q] == -1``.
    """

    jt_node: tuple[int, ...]
    clusters: tuple[frozenset, ...]
    marginals: tuple[Factor, ...]
    parent: tuple[int, ...]
    left: tuple[int, ...]
    right: tuple[int, ...]
    root: int
    target: int
    features: tuple[int, ...]
    sep: tuple[frozenset, ...]
    V: tuple[frozenset, ...]
    ftw: tuple[int, ...]
    jt_width: int

    def __len__(self):
        return len(self.clusters)

    def children(self, q: int) -> tuple[int, ...]:
        return tuple(c for c in (self.left[q], self.right[q]) if c != NONE)

    def is_leaf(self, q: int) -> bool:
        return self.right[q] == NONE

    def U(self, q: int) -> frozenset:
        return frozenset(self.features) - self.V[q]

    def edges(self) -> list[tuple[int, int]]:
        return [(self.parent[q], q) for q in range(len(self)) if self.parent[q] != NONE]

    def index_of(self, jt_node: int) -> int:
        return self.jt_node.index(jt_node)

    def preorder(self) -> list[int]:
        out, stack = [], [self.root]
        while stack:
            q = stack.pop()
            out.append(q)
            stack.extend(reversed(self.children(q)))
        return out

    def subtree(self, q: int) -> list[int]:
        out, stack = [], [q]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(self.children(n))
        return out

    def is_splitting(self, q: int) -> bool:
        """Whether the edge from ``q`` to its parent splits the features."""
        if self.parent[q] == NONE:
            return False
        return not (self.sep[q] & (set(self.features) | {self.target}))


@dataclass(frozen=True)
class CompilationWidthReport:
    omega: int
    omega_R: int
    omega_L: int
    omega_T: int
    R: tuple[int, ...]
    L: tuple[int, ...]


# --------------------------------------------------------------------------
# construction


def _spanning_children(jt: Jointree, root: int, needed: set[int]) -> dict[int, list[int]]:
    parent = {root: NONE}
    order = [root]
    for n in order:
        for m in jt.neighbors(n):
            if m not in parent:
                parent[m] = n
                order.append(m)
    keep = {root}
    for n in needed:
        while n not in keep:
            keep.add(n)
            n = parent[n]
    kids: dict[int, list[int]] = {n: [] for n in keep}
    for n in keep:
        if n != root:
            kids[parent[n]].append(n)
    return kids


def _assemble(
    jt: Jointree,
    spec: ClassifierSpec,
    root_jt: int,
    kids_jt: dict[int, list[int]],
    root_split: int | None,
    left_override: Mapping[int, int] | None = None,
) -> FTree:
    """Number nodes, optionally insert a binary split under the root, compute
    V / ftw bottom-up and orient children."""
    jt_node: list[int] = []
    clusters: list[frozenset] = []
    marg: list[Factor] = []
    parent: list[int] = []
    kids: list[list[int]] = []

    def add(jt_id, cluster, phi, par):
        jt_node.append(jt_id)
        clusters.append(cluster)
        marg.append(phi)
        parent.append(par)
        kids.append([])
        q = len(jt_node) - 1
        if par != NONE:
            kids[par].append(q)
        return q

    root = add(root_jt, jt.clusters[root_jt], jt.marginals[root_jt], NONE)
    stack: list[tuple[int, int]] = []
    top = sorted(kids_jt[root_jt])
    if len(top) > 2:
        keep = top[root_split]
        rest = [c for c in top if c != keep]
        stack.append((keep, root))
        shared = jt.clusters[root_jt] & (jt.clusters[rest[0]] | jt.clusters[rest[1]])
        mid = add(NONE, frozenset(shared), project(jt.marginals[root_jt], shared), root)
        stack.extend((c, mid) for c in rest)
    else:
        stack.extend((c, root) for c in top)
    while stack:
        n, par = stack.pop(0)
        q = add(n, jt.clusters[n], jt.marginals[n], par)
        stack.extend((c, q) for c in sorted(kids_jt[n]))

    feats = frozenset(spec.features)
    size = len(jt_node)
    V: list[frozenset] = [frozenset()] * size
    ftw = [0] * size
    for q in reversed(range(size)):
        V[q] = frozenset(clusters[q] & feats).union(*(V[c] for c in kids[q]))
        ftw[q] = max([len(clusters[q]) - 1] + [ftw[c] for c in kids[q]])
    for q in range(size):
        if jt_node[q] != root_jt and clusters[q] & feats and kids[q]:
            raise StructuralError("features must only appear in leaf nodes of the f-tree")
    if kids[root] and clusters[root] & feats:
        raise StructuralError("root cluster holds a feature but is not a leaf")

    left = [NONE] * size
    right = [NONE] * size
    for q in range(size):
        ch = kids[q]
        if len(ch) == 1:
            right[q] = ch[0]
        elif len(ch) == 2:
            def rank(c):
                return (len(V[c]) + ftw[c], jt_node[c] if jt_node[c] != NONE else 1 << 30, c)
            a, b = sorted(ch, key=rank)
            if left_override and q in left_override:
                a = left_override[q]
                if a not in ch:
                    raise StructuralError(f"node {a} is not a child of {q}")
                b = ch[0] if ch[1] == a else ch[1]
            left[q], right[q] = a, b
        elif len(ch) > 2:
            raise StructuralError(f"f-tree node {q} has more than two children")

    sep = []
    for q in range(size):
        if parent[q] == NONE:
            sep.append(frozenset({spec.target}))
        else:
            sep.append(clusters[q] & clusters[parent[q]])
    return FTree(
        tuple(jt_node), tuple(clusters), tuple(marg), tuple(parent), tuple(left), tuple(right),
        root, spec.target, spec.features, tuple(sep), tuple(V), tuple(ftw), jt.width,
    )


def extract_ftree(jt: Jointree, spec: ClassifierSpec, root: int | None = None) -> FTree:
    """Minimal f-tree spanning the target and every feature.

    ``jt`` must be calibrated and normalized (see
    :func:`bncx.jointree.normalize_shape`).  Every cluster containing the
    target is tried as root (unless ``root`` is given) and the f-tree with the
    smallest compilation width wins; ties prefer fewer nodes, then lower ids.
    """
    if not jt.calibrated:
        raise StructuralError("jointree must be calibrated before extracting an f-tree")
    needed = set()
    for f in spec.features:
        holders = jt.nodes_containing(f)
        if len(holders) != 1:
            raise StructuralError(
                f"feature {f} must appear in exactly one cluster (normalize the jointree)"
            )
        needed.add(holders[0])
    candidates = jt.nodes_containing(spec.target) if root is None else [root]
    if not candidates:
        raise StructuralError("no cluster contains the target")
    best = None
    errors = []
    for r in candidates:
        if spec.target not in jt.clusters[r]:
            raise StructuralError(f"node {r} does not contain the target")
        kids = _spanning_children(jt, r, needed)
        splits = range(3) if len(kids[r]) > 2 else [None]
        for split in splits:
            try:
                ft = _assemble(jt, spec, r, kids, split)
            except StructuralError as exc:
                errors.append(str(exc))
                continue
            key = (compilation_width(ft).omega_T, len(ft), r, -1 if split is None else split)
            if best is None or key < best[0]:
                best = (key, ft)
    if best is None:
        raise StructuralError("no valid f-tree root: " + "; ".join(sorted(set(errors))))
    return best[1]


def orient(ft: FTree, left: Mapping[int, int]) -> FTree:
    """Copy of ``ft`` with the given ``{node: left child}`` choices (f-tree ids)."""
    lf = list(ft.left)
    rt = list(ft.right)
    for q, a in left.items():
        ch = ft.children(q)
        if a not in ch or len(ch) != 2:
            raise StructuralError(f"{a} is not one of two children of {q}")
        lf[q] = a
        rt[q] = ch[0] if ch[1] == a else ch[1]
    return FTree(
        ft.jt_node, ft.clusters, ft.marginals, ft.parent, tuple(lf), tuple(rt), ft.root,
        ft.target, ft.features, ft.sep, ft.V, ft.ftw, ft.jt_width,
    )


# --------------------------------------------------------------------------
# analysis


def split_partition(ft: FTree, edge: tuple[int, int]) -> tuple[frozenset, frozenset] | None:
    """``(U, V)`` if the edge splits the features, else ``None``.

    ``edge`` is ``(p, q)`` in either order; ``V`` is the feature set on the
    side away from the root.
    """
    a, b = edge
    if ft.parent[b] == a:
        q = b
    elif ft.parent[a] == b:
        q = a
    else:
        raise StructuralError(f"({a}, {b}) is not an f-tree edge")
    if not ft.is_splitting(q):
        return None
    return ft.U(q), ft.V[q]


def compilation_width(ft: FTree) -> CompilationWidthReport:
    R = []
    q = ft.root
    while q != NONE:
        R.append(q)
        q = ft.right[q]
    L = [ft.left[q] for q in R if ft.left[q] != NONE]
    omega_R = max(len(ft.U(q)) + len(ft.clusters[q]) for q in R)
    omega_L = max((len(ft.V[q]) + ft.ftw[q] for q in L), default=0)
    omega = ft.jt_width
    omega_T = max(omega, omega_R, omega_L)
    if omega_T > omega + len(ft.features):
        raise StructuralError(f"compilation width {omega_T} exceeds {omega} + {len(ft.features)}")
    return CompilationWidthReport(omega, omega_R, omega_L, omega_T, tuple(R), tuple(L))
