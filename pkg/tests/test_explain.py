import itertools

import pytest
from hypothesis import given, settings, strategies as st

from bncx.compiler import compile_class_formula
from bncx.errors import CapExceeded, UsageError
from bncx.explain import (
    clause_text,
    complete_reason,
    contrastive,
    general_reason,
    gnr,
    gsr,
    necessary_reasons,
    prime_implicants,
    prime_implicates,
    sufficient_reasons,
    term_text,
    variable_minimal,
    violations,
)
from bncx.fixtures import DISEASE_INSTANCE, random_bnc
from bncx.network import classify
from bncx.nnf import NnfStore, equivalent, evaluate, model_mask
from bncx.verify import oracle_complete_reason, oracle_general_reason

from conftest import ftree_for

X_BIN = {0: 1, 1: 0, 2: 1}  # D, not E, F


def lits_model_set(store, lits, vars_, conj=True):
    """Instances (over vars_) satisfying a term (conj) or clause."""
    out = set()
    for x in itertools.product(*(range(store.card(v)) for v in vars_)):
        hits = [x[vars_.index(v)] in s for v, s in lits.items()]
        if (all(hits) if conj else any(hits)):
            out.add(x)
    return out


def test_binary_reasons(example):
    s, root = example.store, example.roots["formula"]
    r = complete_reason(s, root, X_BIN)
    assert r.kind == "complete" and r.formula == root
    assert [term_text(s, t) for t in sufficient_reasons(s, root, X_BIN)] == [
        "E in {false}",
        "D in {true} AND F in {true}",
    ]
    assert [clause_text(s, c) for c in necessary_reasons(s, root, X_BIN)] == [
        "D in {true} OR E in {false}",
        "E in {false} OR F in {true}",
    ]


def test_reason_preconditions(example):
    s = example.store
    with pytest.raises(UsageError, match="OR-decomposable"):
        complete_reason(s, example.roots["negative"], X_BIN)
    with pytest.raises(UsageError, match="does not satisfy"):
        complete_reason(s, example.roots["formula"], {0: 0, 1: 1, 2: 0})


def test_disease_gsr_gnr(disease_circuits, disease):
    spec, _ = disease
    s, root = disease_circuits.store, disease_circuits.roots["type2"]
    x = spec.net.instantiation(DISEASE_INSTANCE)
    assert [term_text(s, t) for t in gsr(s, root, x)] == [
        "CT in {true} AND BP in {High}",
        "BP in {Low,High} AND HR in {Normal,High}",
    ]
    assert [clause_text(s, c) for c in gnr(s, root, x)] == [
        "BP in {Low,High}",
        "CT in {true} OR HR in {Normal,High}",
    ]


def test_variable_minimal():
    a = {0: frozenset({1})}
    ab = {0: frozenset({1}), 1: frozenset({0})}
    b2 = {1: frozenset({0, 1})}
    assert variable_minimal([a, ab, b2]) == [a, b2]


def test_prime_caps(example):
    s = example.store
    with pytest.raises(CapExceeded):
        prime_implicants(s, example.roots["formula"], max_vars=2)
    with pytest.raises(CapExceeded):
        prime_implicates(s, example.roots["formula"], table_cap=10)


def random_formula(seed):
    spec = random_bnc(seed, max_features=5)
    ft = ftree_for(spec)
    i = seed % spec.num_classes
    return spec, compile_class_formula(spec, ft, i), i


@pytest.mark.parametrize("seed", range(12))
def test_reasons_against_oracles(seed):
    spec, comp, i = random_formula(seed)
    s = comp.store
    models = model_mask(s, comp.root, spec.features)
    for idx in list(zip(*models.nonzero()))[:6]:
        x = dict(zip(spec.features, map(int, idx)))
        cr = complete_reason(s, comp.root, x)
        assert equivalent(s, cr.root, oracle_complete_reason(s, comp.root, x), spec.features)
        gr = general_reason(s, comp.root, x)
        try:
            ref = oracle_general_reason(s, comp.root, x)
        except CapExceeded:
            continue
        assert equivalent(s, gr.root, ref, spec.features)


@pytest.mark.parametrize("seed", range(8))
def test_prime_implicants_are_prime(seed):
    spec, comp, _ = random_formula(seed)
    s = comp.store
    vars_ = sorted(spec.features)
    models = set(map(tuple, (map(int, r) for r in zip(*model_mask(s, comp.root, vars_).nonzero()))))
    terms = prime_implicants(s, comp.root, vars_)
    cover = set()
    for t in terms:
        sat = lits_model_set(s, t, vars_)
        assert sat <= models
        cover |= sat
        # widening any state set or dropping a literal breaks implication
        for v in t:
            for extra in range(s.card(v)):
                if extra in t[v]:
                    continue
                wider = dict(t)
                wider[v] = t[v] | {extra}
                assert not lits_model_set(s, wider, vars_) <= models
    assert cover == models


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_implicates_are_implied(seed):
    spec, comp, _ = random_formula(seed % 50)
    s = comp.store
    vars_ = sorted(spec.features)
    models = set(map(tuple, (map(int, r) for r in zip(*model_mask(s, comp.root, vars_).nonzero()))))
    clauses = prime_implicates(s, comp.root, vars_)
    meet = set(itertools.product(*(range(s.card(v)) for v in vars_)))
    for c in clauses:
        sat = lits_model_set(s, c, vars_, conj=False)
        assert models <= sat
        meet &= sat
    assert meet == models


@pytest.mark.parametrize("seed", range(10))
def test_contrastive_violations_flip(seed):
    spec = random_bnc(seed, max_features=5)
    if spec.num_classes < 2:
        pytest.skip("single-class target")
    ft = ftree_for(spec)
    x = {f: 0 for f in spec.features}
    src = classify(spec, x)
    dst = (src + 1) % spec.num_classes
    clauses, comp = contrastive(spec, ft, x, src, dst)
    for c in clauses:
        for y in violations(comp.store, c, x):
            assert not evaluate(comp.store, comp.root, y)
            assert classify(spec, y) == dst
    with pytest.raises(UsageError):
        contrastive(spec, ft, x, src, src)
    with pytest.raises(UsageError):
        contrastive(spec, ft, x, dst, src)


def test_reasons_on_store_without_net():
    s = NnfStore([("P", ("n", "y")), ("Q", ("lo", "mid", "hi"))])
    f = s.disj([s.literal(0, [1]), s.literal(1, [1, 2])])
    x = {0: 1, 1: 2}
    assert [term_text(s, t) for t in gsr(s, f, x)] == ["P in {y}", "Q in {mid,hi}"]
    assert [clause_text(s, c) for c in gnr(s, f, x)] == ["P in {y} OR Q in {mid,hi}"]
