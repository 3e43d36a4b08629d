import itertools

import numpy as np
import pytest

from bncx.errors import CapExceeded
from bncx.factor import allclose
from bncx.fixtures import disease_store, random_bnc
from bncx.network import classify, joint_query
from bncx.nnf import negate
from bncx.verify import (
    OracleReport,
    check_class_formula,
    completions_verdict,
    factorized_joint,
    joint_table,
    oracle_class_table,
    oracle_classify_all,
    splitting_messages,
)

from conftest import ftree_for


def test_oracle_agrees_with_classify(disease):
    spec, _ = disease
    table = oracle_class_table(spec)
    for states in itertools.product(*(range(c) for c in spec.feature_cards())):
        assert table[states] == classify(spec, dict(zip(spec.features, states)))
    parts = oracle_classify_all(spec)
    assert sum(len(v) for v in parts.values()) == table.size


def test_joint_table_layout(disease):
    spec, _ = disease
    t = joint_table(spec)
    assert t.shape == (3,) + spec.feature_cards()
    assert t.sum() == pytest.approx(1.0)


def test_oracle_cap(disease):
    spec, _ = disease
    with pytest.raises(CapExceeded):
        joint_table(spec, cap=4)


def test_check_reports_counterexample(disease):
    spec, _ = disease
    ref = disease_store()
    s = ref.store
    ok = check_class_formula(spec, 2, s, ref.roots["type2"], "type2")
    assert ok.passed and ok.verdict == "pass"
    assert sum(ok.class_counts.values()) == 18
    bad = check_class_formula(spec, 2, s, negate(s, ref.roots["type2"]), "broken")
    assert not bad.passed
    assert set(bad.counterexample) == {"CT", "BP", "HR"}
    rec = bad.record()
    assert rec.startswith("object=broken verdict=fail class0=")
    assert "counterexample=" in rec


def test_report_record_format():
    r = OracleReport("x", True, None, {1: 3, 0: 2}, "two words")
    assert r.record() == "object=x verdict=pass class0=2 class1=3 detail=two_words"


@pytest.mark.parametrize("seed", range(10))
def test_splitting_messages_shape(seed):
    spec = random_bnc(seed)
    ft = ftree_for(spec)
    for q in range(len(ft)):
        if not ft.is_splitting(q):
            continue
        U, S, M = splitting_messages(spec, ft, q)
        cards = spec.net.cards
        assert M.shape == tuple(cards[u] for u in U) + (spec.num_classes, int(np.prod([cards[s] for s in S])))
        # summing out u and S leaves the class prior
        prior = joint_query(spec.net, [spec.target]).values
        np.testing.assert_allclose(M.reshape(-1, *M.shape[-2:]).sum(axis=(0, 2)), prior, rtol=1e-9)


def test_completions_verdict():
    classes = np.array([[0, 0], [1, 0]])
    assert completions_verdict(classes, [5, 7], [5], (0,), 0) == (True, False)
    assert completions_verdict(classes, [5, 7], [5], (1,), 0) == (False, False)
    assert completions_verdict(classes, [5, 7], [7], (0,), 2) == (False, True)


@pytest.mark.parametrize("seed", range(10))
def test_factorized_joint(seed):
    spec = random_bnc(seed, max_features=6)
    ft = ftree_for(spec)
    ref = joint_query(spec.net, (spec.target,) + spec.features)
    for q in range(len(ft)):
        if ft.is_splitting(q):
            assert allclose(factorized_joint(spec, ft, q), ref, rtol=1e-9)
