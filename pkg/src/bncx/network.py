"""Discrete Bayesian networks, variable elimination and the decision rule."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import DegenerateInstanceError, StructuralError
from .factor import Factor, multiply, multiply_all, project, restrict

log = logging.getLogger(__name__)

ROW_TOLERANCE = 1e-6
# rows closer to 1 than this are left untouched (float round-off, not data error)
_ROW_NOISE = 1e-12

Instantiation = dict  # variable id -> state index


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    states: tuple[str, ...]

    @property
    def card(self) -> int:
        return len(self.states)


def make_cpt(
    child: int, parents: Sequence[int], table, cards: Mapping[int, int]
) -> tuple[Factor, int]:
    """Build a CPT factor from ``table`` shaped ``(parent cards..., child card)``.

    Rows off from 1 by at most ``ROW_TOLERANCE`` are renormalized; the count
    of renormalized rows is returned alongside the factor.
    """
    shape = tuple(cards[p] for p in parents) + (cards[child],)
    arr = np.array(table, dtype=np.float64).reshape(shape)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise StructuralError(f"CPT of variable {child} has negative or non-finite entries")
    sums = arr.sum(axis=-1, keepdims=True)
    off = np.abs(sums - 1.0)
    if np.any(off > ROW_TOLERANCE):
        raise StructuralError(
            f"CPT of variable {child} has a row summing to {float(sums.flat[np.argmax(off)])}"
        )
    fix = off > _ROW_NOISE
    n_fixed = int(np.count_nonzero(fix))
    if n_fixed:
        arr = np.where(fix, arr / sums, arr)
    return Factor.new(tuple(parents) + (child,), shape, arr), n_fixed


@dataclass(frozen=True, eq=False)
class BayesNet:
    variables: tuple[Variable, ...]
    parents: tuple[tuple[int, ...], ...]
    cpts: tuple[Factor, ...]
    name: str = "unknown"
    properties: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.variables)
        if [v.id for v in self.variables] != list(range(n)):
            raise StructuralError("variable ids must be contiguous from 0")
        names = [v.name for v in self.variables]
        if len(set(names)) != n:
            raise StructuralError("duplicate variable name")
        for v in self.variables:
            if v.card < 1 or len(set(v.states)) != v.card:
                raise StructuralError(f"variable {v.name} has empty or duplicate states")
        if len(self.parents) != n or len(self.cpts) != n:
            raise StructuralError("one parent list and one CPT per variable required")
        for v, (pa, cpt) in enumerate(zip(self.parents, self.cpts)):
            fam = tuple(sorted(set(pa) | {v}))
            if len(set(pa)) != len(pa) or v in pa:
                raise StructuralError(f"bad parent list for {names[v]}")
            if cpt.scope != fam:
                raise StructuralError(f"CPT scope of {names[v]} is not its family")
            if cpt.cards != tuple(self.variables[u].card for u in fam):
                raise StructuralError(f"CPT cardinalities of {names[v]} are wrong")
            sums = project(cpt, pa).values
            if np.any(np.abs(sums - 1.0) > ROW_TOLERANCE):
                raise StructuralError(f"CPT rows of {names[v]} do not sum to 1")
        self.topological_order()

    # construction ---------------------------------------------------------

    @classmethod
    def from_tables(cls, spec: Sequence[tuple], name: str = "unknown") -> "BayesNet":
        """Build from ``(name, states, parent_names, table)`` tuples.

        ``table`` is shaped ``(parent cards..., child card)`` with parents in
        the listed order.
        """
        index = {row[0]: i for i, row in enumerate(spec)}
        variables = tuple(Variable(i, row[0], tuple(row[1])) for i, row in enumerate(spec))
        cards = {v.id: v.card for v in variables}
        parents, cpts = [], []
        for i, (vname, _, pnames, table) in enumerate(spec):
            pa = tuple(index[p] for p in pnames)
            cpt, fixed = make_cpt(i, pa, table, cards)
            if fixed:
                log.warning("renormalized %d CPT row(s) of %s", fixed, vname)
            parents.append(pa)
            cpts.append(cpt)
        return cls(variables, tuple(parents), tuple(cpts), name=name)

    # structure queries ----------------------------------------------------

    def __len__(self):
        return len(self.variables)

    @property
    def cards(self) -> tuple[int, ...]:
        return tuple(v.card for v in self.variables)

    def index(self, name: str) -> int:
        for v in self.variables:
            if v.name == name:
                return v.id
        raise StructuralError(f"unknown variable {name!r}")

    def state_index(self, var: int, state: str) -> int:
        try:
            return self.variables[var].states.index(state)
        except ValueError:
            raise StructuralError(
                f"unknown state {state!r} of variable {self.variables[var].name}"
            ) from None

    def children(self, v: int) -> list[int]:
        return [c for c, pa in enumerate(self.parents) if v in pa]

    def family(self, v: int) -> frozenset[int]:
        return frozenset(self.parents[v]) | {v}

    def roots(self) -> list[int]:
        return [v for v, pa in enumerate(self.parents) if not pa]

    def leaves(self) -> list[int]:
        has_child = {p for pa in self.parents for p in pa}
        return [v for v in range(len(self)) if v not in has_child]

    def ancestors(self, vars_: Iterable[int]) -> set[int]:
        """``vars_`` together with all of their ancestors."""
        seen: set[int] = set()
        stack = list(vars_)
        while stack:
            v = stack.pop()
            if v not in seen:
                seen.add(v)
                stack.extend(self.parents[v])
        return seen

    def topological_order(self) -> list[int]:
        indeg = [len(pa) for pa in self.parents]
        kids: list[list[int]] = [[] for _ in self.parents]
        for v, pa in enumerate(self.parents):
            for p in pa:
                kids[p].append(v)
        ready = [v for v, d in enumerate(indeg) if d == 0]
        order = []
        while ready:
            v = ready.pop()
            order.append(v)
            for c in kids[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != len(self.parents):
            raise StructuralError("parent graph has a cycle")
        return order

    def moral_graph(self, vars_: Iterable[int] | None = None) -> dict[int, set[int]]:
        keep = set(range(len(self))) if vars_ is None else set(vars_)
        adj: dict[int, set[int]] = {v: set() for v in sorted(keep)}
        for v in keep:
            fam = [u for u in self.family(v) if u in keep]
            for a in fam:
                for b in fam:
                    if a != b:
                        adj[a].add(b)
        return adj

    def instantiation(self, assignment: Mapping[str, str]) -> dict[int, int]:
        """Name-keyed ``{var: state}`` mapping converted to ids."""
        out = {}
        for name, state in assignment.items():
            v = self.index(name)
            out[v] = self.state_index(v, state)
        return out


# --------------------------------------------------------------------------
# elimination orders and variable elimination


def fill_in(adj: Mapping[int, set[int]], v: int) -> int:
    nb = sorted(adj[v])
    return sum(1 for a in range(len(nb)) for b in nb[a + 1:] if b not in adj[nb[a]])


def greedy_minfill(adj: Mapping[int, set[int]], candidates: Iterable[int] | None = None) -> list[int]:
    """Greedy min-fill order over ``candidates`` (default: all vertices).

    Ties go to the lowest id.  ``adj`` is not modified.
    """
    g = {v: set(nb) for v, nb in adj.items()}
    todo = set(g if candidates is None else candidates)
    order = []
    while todo:
        v = min(todo, key=lambda u: (fill_in(g, u), u))
        nb = g.pop(v)
        for a in nb:
            g[a].discard(v)
            g[a] |= nb - {a}
        todo.discard(v)
        order.append(v)
    return order


def joint_query(
    net: BayesNet, targets: Iterable[int], evidence: Mapping[int, int] | None = None
) -> Factor:
    """``P(targets, evidence)`` as a factor over ``targets`` (variable elimination).

    Barren variables are pruned first; the remaining non-target variables are
    summed out in greedy min-fill order.
    """
    evidence = dict(evidence or {})
    targets = set(targets)
    for v in list(targets) + list(evidence):
        if not 0 <= v < len(net):
            raise StructuralError(f"no variable with id {v}")
    if targets & set(evidence):
        raise StructuralError("a variable cannot be both target and evidence")
    relevant = net.ancestors(targets | set(evidence))
    factors = [restrict(net.cpts[v], evidence) for v in sorted(relevant)]
    elim = relevant - targets - set(evidence)

    adj: dict[int, set[int]] = {v: set() for v in relevant - set(evidence)}
    for f in factors:
        for a in f.scope:
            adj[a].update(u for u in f.scope if u != a)
    for v in greedy_minfill(adj, elim):
        touching = [f for f in factors if v in f.scope]
        factors = [f for f in factors if v not in f.scope]
        prod = multiply_all(touching)
        factors.append(project(prod, [u for u in prod.scope if u != v]))
    out = multiply_all(factors)
    if set(out.scope) != targets:
        # targets disconnected from every factor keep a uniform unit axis
        cards = net.cards
        for v in sorted(targets - set(out.scope)):
            out = multiply(out, Factor((v,), (cards[v],), np.ones(cards[v])))
    return out


# --------------------------------------------------------------------------
# classifiers


@dataclass(frozen=True, eq=False)
class ClassifierSpec:
    """A BNC ``(net, features, target)`` with its decision rule.

    ``mode`` is ``"argmax"`` (lowest class index wins ties) or
    ``"threshold"``: the instance is in ``threshold_class`` iff its posterior
    exceeds ``threshold`` strictly, otherwise in the other class.
    """

    net: BayesNet
    target: int
    features: tuple[int, ...]
    mode: str = "argmax"
    threshold: float | None = None
    threshold_class: int = 0

    def __post_init__(self):
        net = self.net
        object.__setattr__(self, "features", tuple(sorted(set(self.features))))
        if not 0 <= self.target < len(net):
            raise StructuralError("target is not a network variable")
        if net.parents[self.target]:
            raise StructuralError(f"target {net.variables[self.target].name} is not a root")
        if self.target in self.features:
            raise StructuralError("target cannot be a feature")
        if not self.features:
            raise StructuralError("at least one feature is required")
        leaves = set(net.leaves())
        for f in self.features:
            if f not in leaves:
                raise StructuralError(f"feature {net.variables[f].name} is not a leaf")
        if self.mode == "threshold":
            if net.variables[self.target].card != 2:
                raise StructuralError("threshold mode requires a binary target")
            if self.threshold is None or not 0.0 < self.threshold < 1.0:
                raise StructuralError("threshold must lie strictly between 0 and 1")
            if self.threshold_class not in (0, 1):
                raise StructuralError("threshold class must be 0 or 1")
        elif self.mode != "argmax":
            raise StructuralError(f"unknown mode {self.mode!r}")

    @property
    def num_classes(self) -> int:
        return self.net.variables[self.target].card

    @property
    def kernel_args(self) -> tuple[int, float, int]:
        """``(mode code, threshold, threshold class)`` for :mod:`bncx.kernels`."""
        if self.mode == "argmax":
            return kernels.ARGMAX, 0.0, 0
        return kernels.THRESHOLD, float(self.threshold), int(self.threshold_class)

    def feature_cards(self) -> tuple[int, ...]:
        return tuple(self.net.variables[f].card for f in self.features)

    def with_threshold(self, t: float, threshold_class: int = 0) -> "ClassifierSpec":
        return ClassifierSpec(self.net, self.target, self.features, "threshold", t, threshold_class)


def decide_class(spec: ClassifierSpec, joint: np.ndarray) -> int:
    """Apply the decision rule to a vector ``P(Y, x)`` (no degeneracy check)."""
    cls, _ = kernels.classify_columns(
        np.asarray(joint, dtype=np.float64).reshape(-1, 1), *spec.kernel_args
    )
    return int(cls[0])


def classify(spec: ClassifierSpec, x: Mapping[int, int]) -> int:
    """Class index of the full feature instantiation ``x``."""
    if set(x) != set(spec.features):
        raise StructuralError("classify needs a full feature instantiation")
    joint = joint_query(spec.net, [spec.target], x).values
    if not joint.sum() > 0.0:
        raise DegenerateInstanceError("instance has probability zero")
    return decide_class(spec, joint)


def average_posterior(spec: ClassifierSpec, class_index: int = 0) -> float:
    """``P(y_i | x)`` averaged uniformly over all feature instances ``x``.

    Zero-probability instances are skipped.
    """
    table = joint_query(spec.net, (spec.target,) + spec.features).values
    table = np.moveaxis(table, spec_axis(spec), 0).reshape(spec.num_classes, -1)
    px = table.sum(axis=0)
    ok = px > 0
    return float(np.mean(table[class_index, ok] / px[ok]))


def spec_axis(spec: ClassifierSpec) -> int:
    """Axis of the target inside a factor over ``{target} ∪ features``."""
    return sorted((spec.target,) + spec.features).index(spec.target)
