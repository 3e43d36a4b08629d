"""Compiling class formulas from an f-tree.

The recursion walks the f-tree along its right spine.  At every node it
carries ``M = P(Y, u, S)`` for the features ``u`` fixed so far and the
separator ``S`` with the parent; whenever ``S`` splits the features the
sign pattern of the class differences over ``S`` may already decide every
completion of ``u``.  Left subtrees are never recursed into: their feature
instantiations are enumerated once, with ``P(v | S)``, and cached.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import CapExceeded
from .factor import Factor, multiply, project, safe_divide
from .ftree import NONE, FTree, compilation_width
from .network import ClassifierSpec
from .nnf import NnfStore, negate

INSTANCE_CAP = 1 << 20


class CompileTimeout(CapExceeded):
    """The wall-clock budget of a compilation ran out."""


@dataclass
class SubtreeInstances:
    """All instantiations ``v`` of a subtree's features with ``P(v | S)``.

    ``table`` has one axis per separator variable (sorted) followed by one
    axis indexing ``assignments``.
    """

    scope: tuple[int, ...]
    cards: tuple[int, ...]
    assignments: list[dict[int, int]]
    table: np.ndarray

    def __len__(self):
        return len(self.assignments)

    def pairs(self):
        for a, v in enumerate(self.assignments):
            yield v, Factor(self.scope, self.cards, np.ascontiguousarray(self.table[..., a]))


@dataclass
class CompileStats:
    target_class: int
    decide_hits: int = 0
    leaf_evaluations: int = 0
    recursive_calls: int = 0
    ties: int = 0
    omega: int = 0
    omega_T: int = 0
    nodes: int = 0
    seconds: float = 0.0

    def record(self) -> str:
        return " ".join(f"{k}={_fmt(v)}" for k, v in vars(self).items())


def _fmt(v):
    return f"{v:.6f}" if isinstance(v, float) else str(v)


@dataclass
class CompileContext:
    spec: ClassifierSpec
    ft: FTree
    target_class: int
    store: NnfStore
    positive: bool = False
    cap: int = INSTANCE_CAP
    deadline: float | None = None
    cache: dict[int, SubtreeInstances] = field(default_factory=dict)
    stats: CompileStats = None
    tie_log: list[tuple[str, int]] = field(default_factory=list)

    def __post_init__(self):
        if not 0 <= self.target_class < self.spec.num_classes:
            raise ValueError(f"class index {self.target_class} out of range")
        if self.stats is None:
            self.stats = CompileStats(self.target_class)
        self._splitting = frozenset(self.spec.features) | {self.spec.target}

    def tick(self):
        self.stats.recursive_calls += 1
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise CompileTimeout("compilation exceeded its time budget")


@dataclass
class Compilation:
    store: NnfStore
    root: int
    inner: int
    stats: CompileStats
    tie_log: list[tuple[str, int]]


# --------------------------------------------------------------------------
# einsum over variable-labelled arrays


def _contract(out: list, *terms):
    """``einsum`` where axes are labelled by hashable names."""
    labels: dict = {}
    args = []
    for arr, axes in terms:
        args.append(arr)
        args.append([labels.setdefault(a, len(labels)) for a in axes])
    args.append([labels[a] for a in out])
    return np.einsum(*args, optimize=True)


_INST = ("inst",)


def _target_first(spec: ClassifierSpec, M: Factor) -> np.ndarray:
    """``M`` as a ``(|Y|, |dom(S)|)`` matrix."""
    vals = np.moveaxis(M.values, M.scope.index(spec.target), 0)
    return np.ascontiguousarray(vals.reshape(vals.shape[0], -1))


# --------------------------------------------------------------------------
# recursion


def decide_negative(M: Factor, S: frozenset, i: int, ctx: CompileContext) -> int:
    """``NEGATIVE`` / ``POSITIVE`` / ``UNDECIDED`` for the partial instantiation
    behind ``M = P(Y, u, S)``.

    Exact ties are logged; the verdict then follows the tie rule of the
    decision function so that it stays sound.
    """
    if S & ctx._splitting:
        return kernels.UNDECIDED
    mode, t, ti = ctx.spec.kernel_args
    verdict, tie = kernels.decide_verdict(_target_first(ctx.spec, M), i, mode, t, ti)
    if tie:
        ctx.tie_log.append(("decide", -1))
        ctx.stats.ties += 1
    return int(verdict)


def _cartesian(assign_l, assign_r):
    return [{**a, **b} for a in assign_l for b in assign_r]


def get_instances(ctx: CompileContext, q: int) -> SubtreeInstances:
    """``(v, P(v | S_pq))`` for every instantiation ``v`` of ``V_q`` (cached)."""
    hit = ctx.cache.get(q)
    if hit is not None:
        return hit
    ft = ctx.ft
    net = ctx.spec.net
    cards = net.cards
    feats = sorted(ft.V[q])
    size = int(np.prod([cards[f] for f in feats], dtype=np.int64))
    if size > ctx.cap:
        raise CapExceeded(f"subtree of node {q} has {size} feature instantiations (cap {ctx.cap})")
    S = tuple(sorted(ft.sep[q]))
    phi = ft.marginals[q]
    den = project(phi, S)
    if ft.is_leaf(q):
        own = sorted(set(phi.scope) & set(feats))
        body = project(phi, set(S) | set(own))
        arr = _contract(list(S) + own, (body.values, body.scope))
        arr = arr.reshape(arr.shape[: len(S)] + (-1,))
        assigns = [dict(zip(own, st)) for st in np.ndindex(*[cards[f] for f in own])]
    else:
        terms = [(phi.values, phi.scope)]
        assigns = [{}]
        for c, tag in ((ft.left[q], "l"), (ft.right[q], "r")):
            if c == NONE:
                continue
            sub = get_instances(ctx, c)
            terms.append((sub.table, sub.scope + (tag,)))
            assigns = _cartesian(assigns, sub.assignments)
        tags = [t for t, c in (("l", ft.left[q]), ("r", ft.right[q])) if c != NONE]
        arr = _contract(list(S) + tags, *terms)
        arr = arr.reshape(arr.shape[: len(S)] + (-1,))
    arr = safe_divide(arr, den.values[..., None])
    # lexicographic order by (variable id, state)
    order = sorted(range(len(assigns)), key=lambda a: tuple(assigns[a][f] for f in feats))
    out = SubtreeInstances(
        S, tuple(cards[v] for v in S), [assigns[a] for a in order], np.ascontiguousarray(arr[..., order])
    )
    ctx.cache[q] = out
    return out


def _leaf_verdicts(ctx: CompileContext, q: int, M: Factor) -> np.ndarray:
    """Boolean per cached instantiation of leaf ``q``: does it join the output set?"""
    inst = get_instances(ctx, q)
    psi = _contract([ctx.spec.target] + list(_INST), (M.values, M.scope), (inst.table, inst.scope + _INST))
    mode, t, ti = ctx.spec.kernel_args
    classes, ties = kernels.classify_columns(np.ascontiguousarray(psi), mode, t, ti)
    ctx.stats.leaf_evaluations += len(inst)
    if ties:
        ctx.tie_log.append(("leaf", q))
        ctx.stats.ties += int(ties)
    hit = classes == ctx.target_class
    return hit if ctx.positive else ~hit


def compile_negative(ctx: CompileContext, q: int, M: Factor) -> int:
    """Circuit over ``V_q`` for the completions ``v`` with ``(u, v)`` outside the
    class (inside it when ``ctx.positive``); ``M = P(Y, u, S_pq)``."""
    ctx.tick()
    ft = ctx.ft
    store = ctx.store
    verdict = decide_negative(M, ft.sep[q], ctx.target_class, ctx)
    if verdict != kernels.UNDECIDED:
        ctx.stats.decide_hits += 1
        wanted = kernels.POSITIVE if ctx.positive else kernels.NEGATIVE
        return store.true() if verdict == wanted else store.false()

    if ft.is_leaf(q):
        keep = _leaf_verdicts(ctx, q, M)
        if keep.all():
            return store.true()
        inst = get_instances(ctx, q)
        return store.disj([store.term(v) for v, k in zip(inst.assignments, keep) if k])

    phi = ft.marginals[q]
    S_in = tuple(sorted(ft.sep[q]))
    joint = multiply(M, phi)
    joint = Factor(joint.scope, joint.cards, safe_divide(joint.values, project(phi, S_in).aligned(joint.scope)))
    r = ft.right[q]
    l = ft.left[q]
    out_scope = sorted(ft.sep[r] | {ctx.spec.target})
    if l == NONE:
        lefts = [{}]
        tables = project(joint, out_scope).values[..., None]
    else:
        inst = get_instances(ctx, l)
        lefts = inst.assignments
        tables = _contract(out_scope + list(_INST), (joint.values, joint.scope), (inst.table, inst.scope + _INST))
    cards = tuple(ctx.spec.net.cards[v] for v in out_scope)
    gamma = []
    for a, v in enumerate(lefts):
        M_r = Factor(tuple(out_scope), cards, np.ascontiguousarray(tables[..., a]))
        alpha = compile_negative(ctx, r, M_r)
        if store.kind[alpha] == kernels.K_FALSE:
            continue
        gamma.append(store.conj([store.term(v), alpha]) if v else alpha)
    return store.disj(gamma)


# --------------------------------------------------------------------------
# entry points


def _run(spec, ft, i, store, positive, cap, timeout) -> tuple[CompileContext, int]:
    if store is None:
        store = NnfStore.for_net(spec.net)
    deadline = None if timeout is None else time.monotonic() + timeout
    ctx = CompileContext(spec, ft, i, store, positive=positive, cap=cap, deadline=deadline)
    start = time.perf_counter()
    prior = project(ft.marginals[ft.root], [spec.target])
    inner = compile_negative(ctx, ft.root, prior)
    ctx.stats.seconds = time.perf_counter() - start
    return ctx, inner


def _finish(ctx: CompileContext, inner: int, root: int) -> Compilation:
    report = compilation_width(ctx.ft)
    ctx.stats.omega = report.omega
    ctx.stats.omega_T = report.omega_T
    ctx.stats.nodes = ctx.store.size(root)
    return Compilation(ctx.store, root, inner, ctx.stats, ctx.tie_log)


def compile_class_formula(
    spec: ClassifierSpec,
    ft: FTree,
    i: int,
    store: NnfStore | None = None,
    cap: int = INSTANCE_CAP,
    timeout: float | None = None,
) -> Compilation:
    """OR-decomposable circuit whose models are the instances of class ``i``.

    ``Compilation.inner`` is the AND-decomposable circuit of the negative
    instances that was negated to obtain ``root``.
    """
    ctx, inner = _run(spec, ft, i, store, False, cap, timeout)
    return _finish(ctx, inner, negate(ctx.store, inner))


def compile_complement(
    spec: ClassifierSpec,
    ft: FTree,
    i: int,
    store: NnfStore | None = None,
    cap: int = INSTANCE_CAP,
    timeout: float | None = None,
) -> Compilation:
    """OR-decomposable circuit for "not class ``i``", via the positive dual."""
    ctx, inner = _run(spec, ft, i, store, True, cap, timeout)
    return _finish(ctx, inner, negate(ctx.store, inner))

