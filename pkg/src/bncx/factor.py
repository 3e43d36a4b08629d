"""Dense factors over discrete variables.

A factor's scope is kept sorted by variable id and its values live in an
``ndarray`` whose axes follow that scope (row-major, so ``values.ravel()``
is the canonical flat layout).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import NumericalError, StructuralError


@dataclass(frozen=True, eq=False)
class Factor:
    scope: tuple[int, ...]
    cards: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        if list(self.scope) != sorted(set(self.scope)):
            raise StructuralError(f"factor scope must be sorted and unique: {self.scope}")
        if len(self.cards) != len(self.scope):
            raise StructuralError("scope and cards differ in length")
        if tuple(self.values.shape) != tuple(self.cards):
            raise StructuralError(
                f"values shape {self.values.shape} does not match cards {self.cards}"
            )

    @classmethod
    def new(cls, scope: Iterable[int], cards: Iterable[int], values) -> "Factor":
        """Validated constructor; ``values`` may follow any scope order given
        by ``scope`` and is transposed into canonical (sorted) layout."""
        scope = tuple(int(v) for v in scope)
        cards = tuple(int(c) for c in cards)
        arr = np.asarray(values, dtype=np.float64).reshape(cards)
        if not np.all(np.isfinite(arr)):
            raise StructuralError("factor values must be finite")
        if np.any(arr < 0):
            raise StructuralError("factor values must be non-negative")
        if len(set(scope)) != len(scope):
            raise StructuralError(f"duplicate variable in scope {scope}")
        perm = sorted(range(len(scope)), key=lambda a: scope[a])
        arr = np.ascontiguousarray(np.transpose(arr, perm))
        return cls(tuple(scope[a] for a in perm), tuple(cards[a] for a in perm), arr)

    @classmethod
    def unit(cls) -> "Factor":
        """The identity factor over the empty scope."""
        return cls((), (), np.ones(()))

    @property
    def card_map(self) -> dict[int, int]:
        return dict(zip(self.scope, self.cards))

    def total(self) -> float:
        return float(self.values.sum())

    def aligned(self, scope: tuple[int, ...]) -> np.ndarray:
        """View of the values broadcastable against a sorted superset scope."""
        pos = {v: a for a, v in enumerate(scope)}
        shape = [1] * len(scope)
        for v, c in zip(self.scope, self.cards):
            if v not in pos:
                raise StructuralError(f"variable {v} not in target scope {scope}")
            shape[pos[v]] = c
        return self.values.reshape(shape)

    def transposed(self, order: Iterable[int]) -> np.ndarray:
        """Values with axes permuted to ``order`` (a permutation of the scope)."""
        order = list(order)
        if sorted(order) != list(self.scope):
            raise StructuralError(f"{order} is not a permutation of {self.scope}")
        axes = [self.scope.index(v) for v in order]
        return np.transpose(self.values, axes)

    def __repr__(self):
        return f"Factor(scope={self.scope}, cards={self.cards})"


def _union(a: Factor, b: Factor) -> tuple[tuple[int, ...], tuple[int, ...]]:
    cards = dict(zip(a.scope, a.cards))
    for v, c in zip(b.scope, b.cards):
        if cards.setdefault(v, c) != c:
            raise StructuralError(f"variable {v} has cardinality {cards[v]} and {c}")
    scope = tuple(sorted(cards))
    return scope, tuple(cards[v] for v in scope)


def multiply(a: Factor, b: Factor) -> Factor:
    """Pointwise product over the union of the scopes."""
    scope, cards = _union(a, b)
    vals = a.aligned(scope) * b.aligned(scope)
    return Factor(scope, cards, np.asarray(vals, dtype=np.float64).reshape(cards))


def multiply_all(factors: Iterable[Factor]) -> Factor:
    out = Factor.unit()
    for f in factors:
        out = multiply(out, f)
    return out


def project(a: Factor, keep: Iterable[int]) -> Factor:
    """Sum out every variable of ``a`` not in ``keep``."""
    keep = set(keep)
    if not keep <= set(a.scope):
        raise StructuralError(f"cannot project {a.scope} onto {sorted(keep)}")
    axes = tuple(ax for ax, v in enumerate(a.scope) if v not in keep)
    if not axes:
        return a
    vals = a.values.sum(axis=axes)
    scope = tuple(v for v in a.scope if v in keep)
    cards = tuple(c for v, c in zip(a.scope, a.cards) if v in keep)
    return Factor(scope, cards, np.asarray(vals, dtype=np.float64).reshape(cards))


def safe_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Broadcast ``num / den`` with ``0/0 = 0``; ``x/0`` for ``x > 0`` raises."""
    num, den = np.broadcast_arrays(num, den)
    zero = den == 0.0
    if np.any(zero & (num != 0.0)):
        raise NumericalError("division of a positive entry by zero")
    out = np.zeros(num.shape, dtype=np.float64)
    np.divide(num, den, out=out, where=~zero)
    return out


def divide(a: Factor, b: Factor) -> Factor:
    """Entrywise ``a / b`` where ``scope(b)`` is a subset of ``scope(a)``."""
    if not set(b.scope) <= set(a.scope):
        raise StructuralError(f"divisor scope {b.scope} not within {a.scope}")
    for v, c in zip(b.scope, b.cards):
        if a.card_map[v] != c:
            raise StructuralError(f"variable {v} has mismatched cardinality")
    return Factor(a.scope, a.cards, safe_divide(a.values, b.aligned(a.scope)))


def restrict(a: Factor, evidence: Mapping[int, int]) -> Factor:
    """Select the slice of ``a`` consistent with ``evidence``; evidence
    variables leave the scope."""
    idx = []
    scope, cards = [], []
    for v, c in zip(a.scope, a.cards):
        if v in evidence:
            s = int(evidence[v])
            if not 0 <= s < c:
                raise StructuralError(f"state {s} out of range for variable {v}")
            idx.append(s)
        else:
            idx.append(slice(None))
            scope.append(v)
            cards.append(c)
    if len(scope) == len(a.scope):
        return a
    return Factor(tuple(scope), tuple(cards), np.ascontiguousarray(a.values[tuple(idx)]))


def allclose(a: Factor, b: Factor, rtol: float = 1e-9, atol: float = 0.0) -> bool:
    """Entrywise comparison after aligning scopes."""
    if set(a.scope) != set(b.scope):
        return False
    return bool(np.allclose(a.values, b.values, rtol=rtol, atol=atol))
