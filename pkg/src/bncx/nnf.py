"""Multi-valued NNF circuits.

An :class:`NnfStore` is an append-only arena of nodes; every node id is
larger than the ids of its children.  Literals are ``var in {states}``;
a literal over the full domain is the constant TRUE and one over no state
is FALSE.  The public constructors also propagate constants (``AND``
with a FALSE child is FALSE, TRUE children are dropped, single-child
gates collapse to the child), which is what the reason filters rely on.
"""

from __future__ import annotations

from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import CapExceeded, CircuitFormatError, UsageError
from .kernels import K_AND, K_FALSE, K_LIT, K_OR, K_TRUE

MODEL_CAP = 1 << 22

_KIND_NAME = {K_TRUE: "TRUE", K_FALSE: "FALSE", K_LIT: "LIT", K_AND: "AND", K_OR: "OR"}


class NnfStore:
    """Node arena over a fixed variable table ``[(name, states), ...]``."""

    def __init__(self, varmeta: Sequence[tuple[str, Sequence[str]]]):
        self.varmeta = tuple((str(n), tuple(str(s) for s in st)) for n, st in varmeta)
        for name, states in self.varmeta:
            if len(states) < 2:
                raise UsageError(f"variable {name} needs at least two states")
        self.kind: list[int] = []
        self.var: list[int] = []
        self.states: list[frozenset] = []
        self.children: list[tuple[int, ...]] = []
        self.roots: dict[str, int] = {}
        self._true: int | None = None
        self._false: int | None = None
        self._varsets: list[int] = []

    @classmethod
    def for_net(cls, net) -> "NnfStore":
        return cls([(v.name, v.states) for v in net.variables])

    def __len__(self):
        return len(self.kind)

    def card(self, v: int) -> int:
        return len(self.varmeta[v][1])

    def var_index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.varmeta):
            if n == name:
                return i
        raise UsageError(f"unknown variable {name!r}")

    # ---------------------------------------------------------------- raw

    def _append(self, kind: int, var: int = -1, states=frozenset(), children=()) -> int:
        n = len(self.kind)
        for c in children:
            if not 0 <= c < n:
                raise UsageError(f"child {c} does not precede node {n}")
        self.kind.append(kind)
        self.var.append(var)
        self.states.append(frozenset(states))
        self.children.append(tuple(children))
        if kind == K_LIT:
            self._varsets.append(1 << var)
        else:
            vs = 0
            for c in children:
                vs |= self._varsets[c]
            self._varsets.append(vs)
        return n

    # ---------------------------------------------------------- builders

    def true(self) -> int:
        if self._true is None:
            self._true = self._append(K_TRUE)
        return self._true

    def false(self) -> int:
        if self._false is None:
            self._false = self._append(K_FALSE)
        return self._false

    def literal(self, var: int, states: Iterable[int]) -> int:
        if not 0 <= var < len(self.varmeta):
            raise UsageError(f"unknown variable id {var}")
        states = frozenset(int(s) for s in states)
        k = self.card(var)
        if any(not 0 <= s < k for s in states):
            raise UsageError(f"state out of range for variable {self.varmeta[var][0]}")
        if not states:
            return self.false()
        if len(states) == k:
            return self.true()
        return self._append(K_LIT, var, states)

    def _gate(self, kind: int, children: Iterable[int]) -> int:
        absorbing, neutral = (K_FALSE, K_TRUE) if kind == K_AND else (K_TRUE, K_FALSE)
        kept = []
        for c in children:
            kc = self.kind[c]
            if kc == absorbing:
                return c
            if kc != neutral:
                kept.append(c)
        if not kept:
            return self.true() if kind == K_AND else self.false()
        if len(kept) == 1:
            return kept[0]
        return self._append(kind, children=kept)

    def conj(self, children: Iterable[int]) -> int:
        return self._gate(K_AND, children)

    def disj(self, children: Iterable[int]) -> int:
        return self._gate(K_OR, children)

    def term(self, assignment: Mapping[int, int]) -> int:
        """Conjunction of singleton literals, in variable-id order."""
        return self.conj(self.literal(v, (s,)) for v, s in sorted(assignment.items()))

    def name(self, label: str, root: int) -> int:
        self.roots[label] = root
        return root

    # ------------------------------------------------------------- queries

    def is_const(self, n: int) -> bool:
        return self.kind[n] in (K_TRUE, K_FALSE)

    def mentioned(self, root: int) -> tuple[int, ...]:
        """Variable ids occurring under ``root``."""
        vs = self._varsets[root]
        out = []
        v = 0
        while vs:
            if vs & 1:
                out.append(v)
            vs >>= 1
            v += 1
        return tuple(out)

    def reachable(self, root: int) -> list[int]:
        """Node ids under ``root`` in ascending (topological) order."""
        seen = {root}
        stack = [root]
        while stack:
            n = stack.pop()
            for c in self.children[n]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return sorted(seen)

    def size(self, root: int) -> int:
        return len(self.reachable(root))

    def describe(self, n: int) -> str:
        k = self.kind[n]
        if k == K_LIT:
            return literal_text(self, self.var[n], self.states[n])
        if k in (K_AND, K_OR):
            return f"{_KIND_NAME[k]}{list(self.children[n])}"
        return _KIND_NAME[k]

    def copy_from(self, other: "NnfStore", root: int) -> int:
        """Rebuild ``other``'s circuit at ``root`` inside this store."""
        if other.varmeta != self.varmeta:
            raise UsageError("stores have different variable tables")
        memo: dict[int, int] = {}
        for n in other.reachable(root):
            k = other.kind[n]
            if k == K_TRUE:
                memo[n] = self.true()
            elif k == K_FALSE:
                memo[n] = self.false()
            elif k == K_LIT:
                memo[n] = self.literal(other.var[n], other.states[n])
            else:
                kids = [memo[c] for c in other.children[n]]
                memo[n] = self._gate(k, kids)
        return memo[root]

    # ------------------------------------------------------- array form

    def arrays(self, root: int, columns: Sequence[int]):
        """Array form of the circuit for :func:`bncx.kernels.eval_circuit`.

        ``columns`` maps variable ids to positions in the instance matrix.
        """
        col = {v: i for i, v in enumerate(columns)}
        nodes = self.reachable(root)
        pos = {n: i for i, n in enumerate(nodes)}
        m = len(nodes)
        kind = np.empty(m, dtype=np.int64)
        lit_var = np.zeros(m, dtype=np.int64)
        lit_mask = np.zeros(m, dtype=np.int64)
        cstart = np.zeros(m + 1, dtype=np.int64)
        cidx = []
        for i, n in enumerate(nodes):
            kind[i] = self.kind[n]
            if self.kind[n] == K_LIT:
                v = self.var[n]
                if v not in col:
                    raise UsageError(f"variable {self.varmeta[v][0]} is not assigned")
                lit_var[i] = col[v]
                lit_mask[i] = sum(1 << s for s in self.states[n])
            cidx.extend(pos[c] for c in self.children[n])
            cstart[i + 1] = len(cidx)
        return kind, lit_var, lit_mask, cstart, np.asarray(cidx, dtype=np.int64)


# ----------------------------------------------------------------------
# printing


def literal_text(store: NnfStore, var: int, states: Iterable[int]) -> str:
    name, names = store.varmeta[var]
    return f"{name} in {{{','.join(names[s] for s in sorted(states))}}}"


def to_text(store: NnfStore, root: int) -> str:
    """Infix rendering with ``AND`` / ``OR``; for reports and debugging."""
    memo: dict[int, str] = {}
    for n in store.reachable(root):
        k = store.kind[n]
        if k in (K_AND, K_OR):
            sep = " AND " if k == K_AND else " OR "
            memo[n] = "(" + sep.join(memo[c] for c in store.children[n]) + ")"
        else:
            memo[n] = store.describe(n)
    return memo[root]


# ----------------------------------------------------------------------
# structural checks


def _check_decomposable(store: NnfStore, root: int, kind: int) -> tuple[bool, int | None]:
    for n in store.reachable(root):
        if store.kind[n] != kind:
            continue
        seen = 0
        for c in store.children[n]:
            vs = store._varsets[c]
            if seen & vs:
                return False, n
            seen |= vs
    return True, None


def check_and_decomposable(store: NnfStore, root: int) -> tuple[bool, int | None]:
    """``(ok, first violating AND node)``."""
    return _check_decomposable(store, root, K_AND)


def check_or_decomposable(store: NnfStore, root: int) -> tuple[bool, int | None]:
    """``(ok, first violating OR node)``."""
    return _check_decomposable(store, root, K_OR)


# ----------------------------------------------------------------------
# transformations


def negate(store: NnfStore, root: int) -> int:
    """De Morgan push of a negation down to the literals."""
    memo: dict[int, int] = {}
    for n in store.reachable(root):
        k = store.kind[n]
        if k == K_TRUE:
            memo[n] = store.false()
        elif k == K_FALSE:
            memo[n] = store.true()
        elif k == K_LIT:
            v = store.var[n]
            memo[n] = store.literal(v, set(range(store.card(v))) - store.states[n])
        else:
            kids = [memo[c] for c in store.children[n]]
            memo[n] = store.disj(kids) if k == K_AND else store.conj(kids)
    return memo[root]


# ----------------------------------------------------------------------
# semantics


def evaluate(store: NnfStore, root: int, x: Mapping[int, int]) -> bool:
    """Truth value under the instantiation ``x`` (variable id -> state)."""
    val: dict[int, bool] = {}
    for n in store.reachable(root):
        k = store.kind[n]
        if k == K_TRUE:
            val[n] = True
        elif k == K_FALSE:
            val[n] = False
        elif k == K_LIT:
            v = store.var[n]
            if v not in x:
                raise UsageError(f"variable {store.varmeta[v][0]} is not assigned")
            val[n] = int(x[v]) in store.states[n]
        elif k == K_AND:
            val[n] = all(val[c] for c in store.children[n])
        else:
            val[n] = any(val[c] for c in store.children[n])
    return val[root]


def instance_matrix(cards: Sequence[int], cap: int = MODEL_CAP) -> np.ndarray:
    """All instantiations of variables with ``cards``, row-major, as rows."""
    total = int(np.prod(cards, dtype=np.int64)) if len(cards) else 1
    if total > cap:
        raise CapExceeded(f"{total} instantiations exceed the cap of {cap}")
    if not cards:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices(tuple(cards)).reshape(len(cards), -1)
    return np.ascontiguousarray(grids.T.astype(np.int64))


def model_mask(store: NnfStore, root: int, vars_: Sequence[int], cap: int = MODEL_CAP) -> np.ndarray:
    """Boolean array of shape ``cards(vars_)``: which instantiations satisfy ``root``.

    ``vars_`` must cover every variable mentioned under ``root``.
    """
    vars_ = list(vars_)
    missing = set(store.mentioned(root)) - set(vars_)
    if missing:
        names = sorted(store.varmeta[v][0] for v in missing)
        raise UsageError(f"variables {names} are mentioned but not enumerated")
    cards = [store.card(v) for v in vars_]
    rows = instance_matrix(cards, cap)
    arrs = store.arrays(root, vars_)
    return kernels.eval_circuit(*arrs, rows).reshape(cards)


def enumerate_models(
    store: NnfStore, root: int, vars_: Sequence[int], cap: int = MODEL_CAP
) -> set[tuple[int, ...]]:
    """Models of ``root`` as state tuples ordered like ``vars_``."""
    mask = model_mask(store, root, vars_, cap)
    if mask.ndim == 0:
        return {()} if bool(mask) else set()
    return {tuple(int(s) for s in idx) for idx in np.argwhere(mask)}


def equivalent(
    store: NnfStore, r1: int, r2: int, vars_: Sequence[int] | None = None, cap: int = MODEL_CAP
) -> bool:
    """Model-set equality by exhaustive evaluation."""
    if vars_ is None:
        vars_ = sorted(set(store.mentioned(r1)) | set(store.mentioned(r2)))
    return bool(np.array_equal(model_mask(store, r1, vars_, cap), model_mask(store, r2, vars_, cap)))


def implies(store: NnfStore, r1: int, r2: int, vars_: Sequence[int] | None = None, cap: int = MODEL_CAP) -> bool:
    if vars_ is None:
        vars_ = sorted(set(store.mentioned(r1)) | set(store.mentioned(r2)))
    return not np.any(model_mask(store, r1, vars_, cap) & ~model_mask(store, r2, vars_, cap))


def all_instantiations(cards: Sequence[int]):
    """Iterator over state tuples in row-major (lexicographic) order."""
    return product(*(range(c) for c in cards))


# ----------------------------------------------------------------------
# mvnnf text format


def _token_ok(s: str) -> bool:
    return bool(s) and not any(ch.isspace() for ch in s)


def write_circuit(store: NnfStore, root: int) -> str:
    """Serialize the nodes reachable from ``root`` (renumbered densely)."""
    nodes = store.reachable(root)
    pos = {n: i for i, n in enumerate(nodes)}
    lines = [f"mvnnf {len(store.varmeta)} {len(nodes)}"]
    for name, states in store.varmeta:
        if not _token_ok(name) or not all(_token_ok(s) for s in states):
            raise CircuitFormatError(f"variable {name!r} has a name or state with whitespace")
        lines.append(f"v {name} {len(states)} {' '.join(states)}")
    for n in nodes:
        k = store.kind[n]
        if k == K_TRUE:
            lines.append("T")
        elif k == K_FALSE:
            lines.append("F")
        elif k == K_LIT:
            lines.append(f"L {store.var[n]} {','.join(str(s) for s in sorted(store.states[n]))}")
        else:
            kids = store.children[n]
            tag = "A" if k == K_AND else "O"
            lines.append(f"{tag} {len(kids)} {' '.join(str(pos[c]) for c in kids)}")
    lines.append(f"root {pos[root]}")
    return "\n".join(lines) + "\n"


def _int(tok: str, what: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise CircuitFormatError(f"line {lineno}: bad {what} {tok!r}") from None


def read_circuit(text: str) -> tuple[NnfStore, int]:
    """Parse mvnnf text; nodes are stored exactly as written (no simplification)."""
    lines = text.splitlines()
    if not lines:
        raise CircuitFormatError("empty circuit text")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "mvnnf":
        raise CircuitFormatError("line 1: expected 'mvnnf <num_vars> <num_nodes>'")
    nv, nn = _int(head[1], "variable count", 1), _int(head[2], "node count", 1)
    if nv < 0 or nn < 1:
        raise CircuitFormatError("line 1: counts out of range")
    if len(lines) != 1 + nv + nn + 1:
        raise CircuitFormatError(f"expected {2 + nv + nn} lines, found {len(lines)}")
    meta = []
    for i in range(nv):
        lineno = i + 2
        tok = lines[1 + i].split()
        if len(tok) < 3 or tok[0] != "v":
            raise CircuitFormatError(f"line {lineno}: expected a variable line")
        k = _int(tok[2], "state count", lineno)
        if k < 2 or len(tok) != 3 + k or len(set(tok[3:])) != k:
            raise CircuitFormatError(f"line {lineno}: bad state list")
        meta.append((tok[1], tok[3:]))
    store = NnfStore(meta)
    for i in range(nn):
        lineno = i + 2 + nv
        tok = lines[1 + nv + i].split()
        if not tok:
            raise CircuitFormatError(f"line {lineno}: empty node line")
        tag = tok[0]
        if tag in ("T", "F") and len(tok) == 1:
            store._append(K_TRUE if tag == "T" else K_FALSE)
        elif tag == "L" and len(tok) == 3:
            v = _int(tok[1], "variable index", lineno)
            if not 0 <= v < nv:
                raise CircuitFormatError(f"line {lineno}: variable index out of range")
            states = [_int(s, "state", lineno) for s in tok[2].split(",")]
            if len(set(states)) != len(states) or any(not 0 <= s < store.card(v) for s in states):
                raise CircuitFormatError(f"line {lineno}: bad state set")
            store._append(K_LIT, v, states)
        elif tag in ("A", "O") and len(tok) >= 2:
            cnt = _int(tok[1], "child count", lineno)
            kids = [_int(c, "child id", lineno) for c in tok[2:]]
            if cnt < 1 or len(kids) != cnt:
                raise CircuitFormatError(f"line {lineno}: child count mismatch")
            if any(not 0 <= c < i for c in kids):
                raise CircuitFormatError(f"line {lineno}: child id must refer to an earlier node")
            store._append(K_AND if tag == "A" else K_OR, children=kids)
        else:
            raise CircuitFormatError(f"line {lineno}: unrecognized node line")
    tok = lines[-1].split()
    if len(tok) != 2 or tok[0] != "root":
        raise CircuitFormatError(f"line {len(lines)}: expected 'root <id>'")
    root = _int(tok[1], "root id", len(lines))
    if not 0 <= root < nn:
        raise CircuitFormatError(f"line {len(lines)}: root id out of range")
    return store, root
