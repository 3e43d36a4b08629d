"""Brute-force oracles.

Everything here works from ``joint_query`` over the original network and
from exhaustive enumeration; nothing reads jointree marginals except
:func:`factorized_joint`, whose purpose is to check them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Mapping

import numpy as np

from .errors import CapExceeded
from .factor import Factor, divide, multiply, multiply_all, project
from .ftree import FTree
from .network import ClassifierSpec, joint_query
from .nnf import NnfStore, model_mask

ORACLE_CAP = 1 << 20


@dataclass
class OracleReport:
    object_id: str
    passed: bool
    counterexample: dict | None = None
    class_counts: dict = field(default_factory=dict)
    detail: str = ""

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def record(self) -> str:
        parts = [f"object={self.object_id}", f"verdict={self.verdict}"]
        for k, n in sorted(self.class_counts.items()):
            parts.append(f"class{k}={n}")
        if self.counterexample is not None:
            cx = ",".join(f"{k}={v}" for k, v in self.counterexample.items())
            parts.append(f"counterexample={cx}")
        if self.detail:
            parts.append(f"detail={self.detail.replace(' ', '_')}")
        return " ".join(parts)


# --------------------------------------------------------------------------
# classification


def joint_table(spec: ClassifierSpec, cap: int = ORACLE_CAP) -> np.ndarray:
    """``P(Y, X)`` with the target on axis 0 and features (sorted) after it."""
    size = int(np.prod(spec.feature_cards(), dtype=np.int64))
    if size > cap:
        raise CapExceeded(f"{size} feature instances exceed the oracle cap of {cap}")
    f = joint_query(spec.net, (spec.target,) + spec.features)
    return f.transposed((spec.target,) + spec.features)


def oracle_class_table(spec: ClassifierSpec, cap: int = ORACLE_CAP) -> np.ndarray:
    """Class index of every feature instance, shaped ``feature_cards``."""
    table = joint_table(spec, cap)
    if spec.mode == "argmax":
        # np.argmax returns the first maximum: the lowest index wins ties
        return np.argmax(table, axis=0)
    t, ti = spec.threshold, spec.threshold_class
    score = (1.0 - t) * table[ti] - t * table[1 - ti]
    return np.where(score > 0.0, ti, 1 - ti)


def oracle_classify_all(spec: ClassifierSpec, cap: int = ORACLE_CAP) -> dict[int, set[tuple]]:
    """Class index -> set of feature instances (state tuples in feature order)."""
    classes = oracle_class_table(spec, cap)
    out: dict[int, set[tuple]] = {i: set() for i in range(spec.num_classes)}
    for idx in np.ndindex(*classes.shape):
        out[int(classes[idx])].add(tuple(int(s) for s in idx))
    return out


def _named(spec_or_store, vars_, states) -> dict:
    if isinstance(spec_or_store, NnfStore):
        meta = spec_or_store.varmeta
        return {meta[v][0]: meta[v][1][s] for v, s in zip(vars_, states)}
    net = spec_or_store.net
    return {net.variables[v].name: net.variables[v].states[s] for v, s in zip(vars_, states)}


def check_class_formula(
    spec: ClassifierSpec, i: int, store: NnfStore, root: int, object_id: str | None = None
) -> OracleReport:
    """Compare the models of ``root`` with the oracle's instances of class ``i``."""
    classes = oracle_class_table(spec)
    counts = {k: int(np.count_nonzero(classes == k)) for k in range(spec.num_classes)}
    models = model_mask(store, root, spec.features)
    diff = np.argwhere(models != (classes == i))
    oid = object_id or f"class-{i}"
    if len(diff):
        first = tuple(int(s) for s in diff[0])
        why = "extra model" if models[first] else "missing model"
        return OracleReport(oid, False, _named(spec, spec.features, first), counts, why)
    return OracleReport(oid, True, None, counts)


# --------------------------------------------------------------------------
# partial-instantiation soundness


def splitting_messages(spec: ClassifierSpec, ft: FTree, q: int) -> tuple[list[int], list[int], np.ndarray]:
    """For the splitting edge above ``q``: ``(U, S, M)`` with ``M[u]`` the
    matrix ``P(Y, u, S)`` of shape ``(|Y|, |dom(S)|)`` for every ``u``."""
    U = sorted(ft.U(q))
    V = sorted(ft.V[q])
    S = sorted(ft.sep[q])
    f = joint_query(spec.net, [spec.target] + U + V + S)
    f = project(f, [spec.target] + U + S)
    arr = f.transposed([spec.target] + U + S)
    cards = spec.net.cards
    ucards = [cards[u] for u in U]
    nS = int(np.prod([cards[s] for s in S], dtype=np.int64))
    arr = arr.reshape((cards[spec.target],) + tuple(ucards) + (nS,))
    arr = np.moveaxis(arr, 0, -2)  # (u..., Y, S)
    return U, S, arr


def completions_verdict(classes: np.ndarray, features, U, u, i) -> tuple[bool, bool]:
    """``(all completions are class i, none is)`` for the partial ``u``."""
    idx = tuple(u[U.index(f)] if f in U else slice(None) for f in features)
    block = classes[idx]
    return bool(np.all(block == i)), bool(np.all(block != i))


# --------------------------------------------------------------------------
# the factorized joint across a splitting edge


def _side_joint(ft: FTree, nodes: list[int]) -> Factor:
    inside = set(nodes)
    f = multiply_all(ft.marginals[n] for n in nodes)
    for n in nodes:
        p = ft.parent[n]
        if p in inside:
            sep = project(ft.marginals[n], ft.sep[n])
            f = divide(f, sep)
    return f


def factorized_joint(spec: ClassifierSpec, ft: FTree, q: int) -> Factor:
    """``sum_s P(Y, U, s) P(V | s)`` across the edge above ``q``, from the
    calibrated f-tree marginals."""
    below = ft.subtree(q)
    above = [n for n in range(len(ft)) if n not in set(below)]
    S = ft.sep[q]
    U, V = ft.U(q), ft.V[q]
    left = project(_side_joint(ft, above), {spec.target} | U | S)
    right_joint = project(_side_joint(ft, below), V | S)
    right = divide(right_joint, project(right_joint, S))
    return project(multiply(left, right), {spec.target} | set(spec.features))


# --------------------------------------------------------------------------
# reasons


def _instance_block(mask: np.ndarray, vars_, x: Mapping[int, int], chosen) -> np.ndarray:
    idx = tuple(x[v] if v in chosen else slice(None) for v in vars_)
    return mask[idx]


def oracle_complete_reason(store: NnfStore, root: int, x: Mapping[int, int], max_vars: int = 12) -> int:
    """Disjunction of the subset-minimal sub-terms of ``x`` that imply ``root``."""
    vars_ = sorted(store.mentioned(root))
    if len(vars_) > max_vars:
        raise CapExceeded(f"{len(vars_)} variables exceed the oracle cap of {max_vars}")
    mask = model_mask(store, root, vars_)
    minimal: list[frozenset] = []
    for size in range(len(vars_) + 1):
        for chosen in combinations(vars_, size):
            c = frozenset(chosen)
            if any(m <= c for m in minimal):
                continue
            if np.all(_instance_block(mask, vars_, x, c)):
                minimal.append(c)
    return store.disj(store.term({v: x[v] for v in sorted(c)}) for c in minimal)


def oracle_general_reason(store: NnfStore, root: int, x: Mapping[int, int], max_terms: int = 1 << 16) -> int:
    """Disjunction of every term whose literals contain ``x``'s states and
    which implies ``root``."""
    vars_ = sorted(store.mentioned(root))
    mask = model_mask(store, root, vars_)
    options = []
    total = 1
    for v in vars_:
        others = [s for s in range(store.card(v)) if s != x[v]]
        subsets = [frozenset((x[v],) + extra) for k in range(len(others) + 1) for extra in combinations(others, k)]
        options.append(subsets)
        total *= len(subsets)
    if total > max_terms:
        raise CapExceeded(f"{total} candidate terms exceed the oracle cap of {max_terms}")
    terms = []
    for choice in product(*options):
        idx = np.ix_(*[sorted(s) for s in choice]) if vars_ else ()
        if np.all(mask[idx]):
            terms.append(store.conj(store.literal(v, s) for v, s in zip(vars_, choice)))
    return store.disj(terms)
