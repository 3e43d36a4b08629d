"""Reference networks and circuits used by tests, the CLI and the benchmarks.

* ``hub_net`` - the seven-variable network ``A..G`` with target ``A`` and
  features ``D, E, F``; CPTs are drawn from a seeded Dirichlet.
* ``hub_jointree`` - its five-cluster jointree plus the
  ``{B, C}`` hub node.
* ``binary_example`` - the three-feature binary class formula and its negation.
* ``disease_net`` / ``disease_store`` - the three-class diagnosis network
  (target ``D``; features ``CT``, ``BP``, ``HR``) whose CPTs were chosen so
  that its class formulas are exactly the reference ones for classes 2 and
  "not 0".
* ``early_spec`` - a classifier in which one feature settles most decisions,
  so the compiler can stop before reaching the other features.
* ``random_bnc`` - seeded random classifiers of several shapes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jointree import Jointree, calibrate, from_clusters
from .network import BayesNet, ClassifierSpec
from .nnf import NnfStore

BOOL = ("false", "true")
LEVELS = ("Low", "Normal", "High")


def _dirichlet(rng: np.random.Generator, rows: int, k: int, alpha: float) -> np.ndarray:
    t = rng.dirichlet(np.full(k, alpha), size=rows)
    # keep every entry strictly positive so no instance has probability zero
    t = np.maximum(t, 1e-3)
    return t / t.sum(axis=1, keepdims=True)


def _table(rng, cards_parents, k, alpha):
    rows = int(np.prod(cards_parents, dtype=np.int64)) if cards_parents else 1
    return _dirichlet(rng, rows, k, alpha).reshape(tuple(cards_parents) + (k,))


# --------------------------------------------------------------------------
# the seven-variable network


HUB_PARENTS = {
    "A": (),
    "B": ("A", "G"),
    "C": ("A",),
    "D": ("B",),
    "E": ("B", "C"),
    "F": ("B", "C"),
    "G": ("A",),
}


def hub_net(seed: int = 0, cards: dict | None = None, alpha: float = 1.0) -> BayesNet:
    """Variables ``A..G`` (ids 0..6), binary unless ``cards`` says otherwise."""
    rng = np.random.default_rng(seed)
    cards = {v: 2 for v in HUB_PARENTS} | dict(cards or {})
    rows = []
    for v, pa in HUB_PARENTS.items():
        k = cards[v]
        states = BOOL if k == 2 else tuple(f"s{i}" for i in range(k))
        rows.append((v, states, pa, _table(rng, [cards[p] for p in pa], k, alpha)))
    return BayesNet.from_tables(rows, name="hub")


def hub_spec(seed: int = 0, **kw) -> ClassifierSpec:
    net = hub_net(seed, **kw)
    return ClassifierSpec(net, net.index("A"), tuple(net.index(v) for v in "DEF"))


# clusters by node label 1..6; list index = label - 1
HUB_CLUSTERS = ("BCF", "BCE", "BC", "BD", "ABG", "ABC")
HUB_EDGES = ((6, 4), (6, 3), (6, 5), (3, 1), (3, 2))


def hub_jointree(net: BayesNet, calibrated: bool = True) -> Jointree:
    clusters = [[net.index(c) for c in cl] for cl in HUB_CLUSTERS]
    edges = [(a - 1, b - 1) for a, b in HUB_EDGES]
    jt = from_clusters(net, clusters, edges)
    return calibrate(jt, net) if calibrated else jt


# --------------------------------------------------------------------------
# binary example circuits


@dataclass
class ExampleCircuits:
    store: NnfStore
    roots: dict[str, int]


def binary_example() -> ExampleCircuits:
    """Variables ``D, E, F`` (ids 0..2).

    ``negative`` is the AND-decomposable negative circuit
    ``(~D & E) | (D & (E & ~F))`` and ``formula`` its OR-decomposable negation
    ``(D | ~E) & (~D | (~E | F))``, the class formula.
    """
    s = NnfStore([(v, BOOL) for v in "DEF"])
    D, E, F = 0, 1, 2
    pos = {v: s.literal(v, (1,)) for v in (D, E, F)}
    neg = {v: s.literal(v, (0,)) for v in (D, E, F)}
    a = s.conj([neg[D], pos[E]])
    b = s.conj([pos[D], s.conj([pos[E], neg[F]])])
    negative = s.disj([a, b])
    c1 = s.disj([pos[D], neg[E]])
    c2 = s.disj([neg[D], s.disj([neg[E], pos[F]])])
    formula = s.conj([c1, c2])
    return ExampleCircuits(s, {"negative": s.name("negative", negative), "formula": s.name("formula", formula)})


def binary_formula_only() -> ExampleCircuits:
    """Just the class formula, built in a fresh store (for round-trips)."""
    s = NnfStore([(v, BOOL) for v in "DEF"])
    D, E, F = 0, 1, 2
    c1 = s.disj([s.literal(D, (1,)), s.literal(E, (0,))])
    c2 = s.disj([s.literal(D, (0,)), s.disj([s.literal(E, (0,)), s.literal(F, (1,))])])
    return ExampleCircuits(s, {"formula": s.name("formula", s.conj([c1, c2]))})


# --------------------------------------------------------------------------
# the diagnosis network


DISEASE_VARS = (
    ("D", ("0", "1", "2"), ()),
    ("X", BOOL, ("D",)),
    ("Y", BOOL, ("D", "X")),
    ("CT", BOOL, ("Y",)),
    ("BP", LEVELS, ("X", "Y")),
    ("HR", LEVELS, ("X", "Y")),
)

DISEASE_CPTS = {
    "D": [0.37, 0.12, 0.51],
    "X": [[0.83, 0.17], [0.98, 0.02], [0.02, 0.98]],
    "Y": [[[0.97, 0.03], [0.02, 0.98]], [[0.06, 0.94], [0.02, 0.98]], [[0.98, 0.02], [0.10, 0.90]]],
    "CT": [[0.73, 0.27], [0.23, 0.77]],
    "BP": [[[0.04, 0.93, 0.03], [0.05, 0.92, 0.03]], [[0.43, 0.24, 0.33], [0.22, 0.02, 0.76]]],
    "HR": [[[0.96, 0.02, 0.02], [0.21, 0.13, 0.66]], [[0.10, 0.11, 0.79], [0.02, 0.03, 0.95]]],
}


def disease_net(cpts: dict | None = None) -> BayesNet:
    cpts = DISEASE_CPTS if cpts is None else cpts
    return BayesNet.from_tables(
        [(n, st, pa, cpts[n]) for n, st, pa in DISEASE_VARS], name="disease"
    )


def disease_spec(net: BayesNet | None = None) -> ClassifierSpec:
    net = disease_net() if net is None else net
    return ClassifierSpec(net, net.index("D"), tuple(net.index(v) for v in ("CT", "BP", "HR")))


DISEASE_INSTANCE = {"BP": "High", "CT": "true", "HR": "Normal"}


def disease_store() -> ExampleCircuits:
    """The reference class formula of type 2 (``type2``) and of "not type 0"
    (``not_type0``), over the diagnosis network's variables."""
    s = NnfStore([(n, st) for n, st, _ in DISEASE_VARS])
    CT, BP, HR = 3, 4, 5
    Lo, No, Hi = 0, 1, 2
    # type 2
    hr_nh = s.literal(HR, (No, Hi))
    ct = s.literal(CT, (1,))
    bp_h = s.literal(BP, (Hi,))
    left = s.disj([hr_nh, s.conj([ct, bp_h])])
    right = s.disj([s.literal(BP, (Lo, Hi)), s.literal(HR, (Lo,))])
    type2 = s.conj([left, right])
    # not type 0; the HR in {Normal, High} and CT literals are shared
    o12 = s.disj([s.literal(BP, (No, Hi)), hr_nh])
    o11 = s.disj([s.literal(CT, (0,)), hr_nh])
    o14 = s.disj([ct, s.literal(HR, (Hi,))])
    o16 = s.disj([s.literal(BP, (Lo, Hi)), s.conj([o11, o14])])
    o17 = s.disj([s.literal(BP, (Lo, No)), ct, hr_nh])
    not_type0 = s.conj([o12, o16, o17])
    return ExampleCircuits(s, {"type2": s.name("type2", type2), "not_type0": s.name("not_type0", not_type0)})


# --------------------------------------------------------------------------
# early decisions


def early_spec() -> ClassifierSpec:
    """Target ``Y`` with hidden children ``H1`` and ``H2``; ``D`` hangs off ``H1``,
    ``E`` and ``F`` off ``H2``.  ``D = false`` alone settles the class."""
    net = BayesNet.from_tables(
        [
            ("Y", BOOL, (), [0.5, 0.5]),
            ("H1", BOOL, ("Y",), [[0.95, 0.05], [0.05, 0.95]]),
            ("H2", BOOL, ("Y",), [[0.7, 0.3], [0.3, 0.7]]),
            ("D", BOOL, ("H1",), [[0.95, 0.05], [0.45, 0.55]]),
            ("E", BOOL, ("H2",), [[0.8, 0.2], [0.2, 0.8]]),
            ("F", BOOL, ("H2",), [[0.8, 0.2], [0.2, 0.8]]),
        ],
        name="early",
    )
    return ClassifierSpec(net, 0, (3, 4, 5))


# --------------------------------------------------------------------------
# random classifiers


SHAPES = ("chain", "tree", "hub", "dag")


def _shape_parents(rng: np.random.Generator, shape: str, max_vars: int) -> list[list[int]]:
    """Parent lists over ids ``0..n-1`` in topological order; id 0 is the target."""
    if shape == "hub":
        names = list(HUB_PARENTS)
        return [[names.index(p) for p in HUB_PARENTS[v]] for v in names]
    if shape == "chain":
        length = int(rng.integers(2, 5))
        parents = [[]] + [[i] for i in range(length - 1)]
        for i in range(length - 1):
            if len(parents) < max_vars and rng.random() < 0.8:
                parents.append([i])
        return parents
    n = int(rng.integers(4, max_vars + 1))
    parents = [[]]
    for v in range(1, n):
        if shape == "tree":
            parents.append([int(rng.integers(0, v))])
        else:
            k = int(rng.integers(1, min(3, v) + 1))
            parents.append(sorted(int(p) for p in rng.choice(v, size=k, replace=False)))
    return parents


def random_bnc(
    seed: int,
    shape: str | None = None,
    max_vars: int = 12,
    max_features: int = 8,
    alpha: float = 1.0,
    card_range: tuple[int, int] = (2, 3),
) -> ClassifierSpec:
    """A seeded random classifier; every leaf up to ``max_features`` is a feature."""
    rng = np.random.default_rng(seed)
    if shape is None:
        shape = SHAPES[seed % len(SHAPES)]
    parents = _shape_parents(rng, shape, max_vars)
    n = len(parents)
    cards = [int(rng.integers(card_range[0], card_range[1] + 1)) for _ in range(n)]
    rows = []
    for v in range(n):
        states = BOOL if cards[v] == 2 else tuple(f"s{i}" for i in range(cards[v]))
        pa = [f"V{p}" for p in parents[v]]
        rows.append((f"V{v}", states, pa, _table(rng, [cards[p] for p in parents[v]], cards[v], alpha)))
    net = BayesNet.from_tables(rows, name=f"random-{shape}-{seed}")
    leaves = [v for v in net.leaves() if v != 0]
    if len(leaves) > max_features:
        leaves = sorted(int(v) for v in rng.choice(leaves, size=max_features, replace=False))
    return ClassifierSpec(net, 0, tuple(leaves))
