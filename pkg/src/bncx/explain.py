"""Explanations read off OR-decomposable class formulas.

Reasons are circuits built by a single pass over the class formula; prime
implicants and implicates are computed exhaustively over the lattice of
multi-valued terms, which is fine for the handful of variables a reason
usually mentions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import CapExceeded, UsageError
from .kernels import K_AND, K_FALSE, K_LIT, K_TRUE
from .nnf import NnfStore, check_or_decomposable, evaluate, literal_text, model_mask

MAX_VARS = 12
TABLE_CAP = 1 << 25

# a term or clause: variable id -> state set (absent variables are unconstrained)
Literals = dict[int, frozenset]


@dataclass(frozen=True)
class Reason:
    store: NnfStore
    root: int
    kind: str
    instance: dict
    formula: int


def _filtered(store: NnfStore, root: int, x: Mapping[int, int], keep_whole: bool) -> int:
    ok, bad = check_or_decomposable(store, root)
    if not ok:
        raise UsageError(f"circuit is not OR-decomposable (node {bad})")
    if not evaluate(store, root, x):
        raise UsageError("decision mismatch: the instance does not satisfy the formula")
    memo: dict[int, int] = {}
    for n in store.reachable(root):
        k = store.kind[n]
        if k in (K_TRUE, K_FALSE):
            memo[n] = n
        elif k == K_LIT:
            s = x[store.var[n]]
            if s not in store.states[n]:
                memo[n] = store.false()
            else:
                memo[n] = n if keep_whole else store.literal(store.var[n], (s,))
        else:
            kids = [memo[c] for c in store.children[n]]
            memo[n] = store.conj(kids) if k == K_AND else store.disj(kids)
    return memo[root]


def complete_reason(store: NnfStore, root: int, x: Mapping[int, int]) -> Reason:
    """Weakest circuit over the instance's own literals that implies ``root``."""
    out = _filtered(store, root, x, keep_whole=False)
    return Reason(store, out, "complete", dict(x), root)


def general_reason(store: NnfStore, root: int, x: Mapping[int, int]) -> Reason:
    """Weakest circuit over literals satisfied by the instance that implies ``root``."""
    out = _filtered(store, root, x, keep_whole=True)
    return Reason(store, out, "general", dict(x), root)


# --------------------------------------------------------------------------
# prime implicants / implicates


def _lattice(mask: np.ndarray, cards: Sequence[int]) -> np.ndarray:
    """``implied[m_1, ..., m_n]``: does the term with state masks ``m`` imply ``mask``?

    Axis ``a`` of the result has ``2**cards[a] - 1`` entries, entry ``m - 1``
    standing for the non-empty state mask ``m``.
    """
    out = mask
    for a, k in enumerate(cards):
        out = np.moveaxis(out, a, 0)
        layers = []
        for m in range(1, 1 << k):
            states = [s for s in range(k) if m >> s & 1]
            layers.append(np.logical_and.reduce(out[states], axis=0))
        out = np.moveaxis(np.stack(layers), 0, a)
    return out


def _primes(mask: np.ndarray, cards: Sequence[int]) -> list[tuple[int, ...]]:
    implied = _lattice(mask, cards)
    enlargeable = np.zeros_like(implied)
    for a, k in enumerate(cards):
        full = (1 << k) - 1
        moved = np.moveaxis(implied, a, 0)
        grow = np.zeros_like(moved)
        for m in range(1, full):
            for s in range(k):
                if not m >> s & 1:
                    grow[m - 1] |= moved[(m | 1 << s) - 1]
        enlargeable |= np.moveaxis(grow, 0, a)
    prime = implied & ~enlargeable
    return [tuple(int(i) + 1 for i in idx) for idx in np.argwhere(prime)]


def _check_size(store: NnfStore, vars_: Sequence[int], max_vars: int, table_cap: int):
    if len(vars_) > max_vars:
        raise CapExceeded(f"{len(vars_)} variables exceed the prime-computation cap of {max_vars}")
    size = 1
    for v in vars_:
        size *= (1 << store.card(v)) - 1
    if size > table_cap:
        raise CapExceeded(f"term lattice of {size} entries exceeds the cap of {table_cap}")


def _sort_key(lits: Literals):
    vs = sorted(lits)
    return len(vs), vs, [sorted(lits[v]) for v in vs]


def _decode(store: NnfStore, vars_: Sequence[int], masks: tuple[int, ...], complement: bool) -> Literals:
    out = {}
    for v, m in zip(vars_, masks):
        k = store.card(v)
        if m == (1 << k) - 1:
            continue
        states = frozenset(s for s in range(k) if (m >> s & 1) != complement)
        out[v] = states
    return out


def prime_implicants(
    store: NnfStore,
    root: int,
    vars_: Sequence[int] | None = None,
    max_vars: int = MAX_VARS,
    table_cap: int = TABLE_CAP,
) -> list[Literals]:
    """Prime implicants of ``root`` as ``{var: states}`` terms."""
    vars_ = sorted(store.mentioned(root) if vars_ is None else vars_)
    _check_size(store, vars_, max_vars, table_cap)
    cards = [store.card(v) for v in vars_]
    mask = model_mask(store, root, vars_)
    terms = [_decode(store, vars_, m, False) for m in _primes(mask, cards)]
    return sorted(terms, key=_sort_key)


def prime_implicates(
    store: NnfStore,
    root: int,
    vars_: Sequence[int] | None = None,
    max_vars: int = MAX_VARS,
    table_cap: int = TABLE_CAP,
) -> list[Literals]:
    """Prime implicates of ``root`` as ``{var: states}`` clauses.

    Obtained as the negated prime implicants of the negation.
    """
    vars_ = sorted(store.mentioned(root) if vars_ is None else vars_)
    _check_size(store, vars_, max_vars, table_cap)
    cards = [store.card(v) for v in vars_]
    mask = ~model_mask(store, root, vars_)
    clauses = [_decode(store, vars_, m, True) for m in _primes(mask, cards)]
    return sorted(clauses, key=_sort_key)


def variable_minimal(members: Sequence[Literals]) -> list[Literals]:
    """Drop members whose variable set strictly contains another member's."""
    sets = [frozenset(m) for m in members]
    return [m for m, s in zip(members, sets) if not any(o < s for o in sets)]


def sufficient_reasons(store: NnfStore, root: int, x: Mapping[int, int]) -> list[Literals]:
    return prime_implicants(store, complete_reason(store, root, x).root)


def necessary_reasons(store: NnfStore, root: int, x: Mapping[int, int]) -> list[Literals]:
    return prime_implicates(store, complete_reason(store, root, x).root)


def gsr(store: NnfStore, root: int, x: Mapping[int, int]) -> list[Literals]:
    """Variable-minimal prime implicants of the general reason."""
    return variable_minimal(prime_implicants(store, general_reason(store, root, x).root))


def gnr(store: NnfStore, root: int, x: Mapping[int, int]) -> list[Literals]:
    """Variable-minimal prime implicates of the general reason."""
    return variable_minimal(prime_implicates(store, general_reason(store, root, x).root))


def contrastive(spec, ft, x: Mapping[int, int], from_class: int, to_class: int, store=None):
    """Minimal targeted changes that would move ``x`` into ``to_class``.

    Compiles the formula for "not ``to_class``" and returns its general
    necessary reasons for ``x``; violating any returned clause (by
    reassigning exactly its variables) yields an instance of ``to_class``.
    """
    from .compiler import compile_complement
    from .network import classify

    if from_class == to_class:
        raise UsageError("source and destination classes coincide")
    got = classify(spec, x)
    if got != from_class:
        raise UsageError(f"instance is classified {got}, not {from_class}")
    comp = compile_complement(spec, ft, to_class, store=store)
    return gnr(comp.store, comp.root, x), comp


def violations(store: NnfStore, clause: Literals, x: Mapping[int, int]) -> list[dict]:
    """Instances obtained from ``x`` by reassigning exactly the clause's
    variables to states that falsify every one of its literals."""
    vars_ = sorted(clause)
    options = [[s for s in range(store.card(v)) if s not in clause[v]] for v in vars_]
    out = [dict(x)]
    for v, opts in zip(vars_, options):
        out = [{**y, v: s} for y in out for s in opts]
    return out


# --------------------------------------------------------------------------
# reports


def literals_text(store: NnfStore, lits: Literals, joiner: str) -> str:
    if not lits:
        return "TRUE" if joiner == "AND" else "FALSE"
    return f" {joiner} ".join(literal_text(store, v, lits[v]) for v in sorted(lits))


def term_text(store: NnfStore, term: Literals) -> str:
    return literals_text(store, term, "AND")


def clause_text(store: NnfStore, clause: Literals) -> str:
    return literals_text(store, clause, "OR")
