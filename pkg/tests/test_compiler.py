import numpy as np
import pytest

from bncx.compiler import (
    CompileContext,
    CompileTimeout,
    compile_class_formula,
    compile_complement,
    get_instances,
)
from bncx.errors import CapExceeded
from bncx.factor import project
from bncx.fixtures import BOOL, disease_store, hub_spec, random_bnc
from bncx.network import BayesNet, ClassifierSpec
from bncx.nnf import check_and_decomposable, enumerate_models, check_or_decomposable, equivalent, negate
from bncx.verify import check_class_formula

from conftest import ftree_for


def all_classes_match(spec, ft):
    for i in range(spec.num_classes):
        comp = compile_class_formula(spec, ft, i)
        report = check_class_formula(spec, i, comp.store, comp.root)
        assert report.passed, report.record()


def test_hub_all_classes(hub):
    all_classes_match(*hub)


def test_disease_matches_reference_circuits(disease):
    spec, ft = disease
    ref = disease_store()
    s = ref.store
    two = compile_class_formula(spec, ft, 2, store=s)
    assert equivalent(s, two.root, ref.roots["type2"])
    not0 = compile_complement(spec, ft, 0, store=s)
    assert equivalent(s, not0.root, ref.roots["not_type0"])
    all_classes_match(spec, ft)


def test_complement_is_negation(disease):
    spec, ft = disease
    for i in range(spec.num_classes):
        pos = compile_class_formula(spec, ft, i)
        neg = compile_complement(spec, ft, i, store=pos.store)
        assert equivalent(pos.store, neg.root, negate(pos.store, pos.root))
        assert check_or_decomposable(neg.store, neg.root)[0]
        assert check_and_decomposable(neg.store, neg.inner)[0]


@pytest.mark.parametrize("seed", range(0, 40, 3))
def test_random_threshold_mode(seed):
    spec = random_bnc(seed, card_range=(2, 2))
    for t, tc in [(0.5, 0), (0.3, 1), (0.8, 0)]:
        all_classes_match(spec.with_threshold(t, tc), ftree_for(spec))


def test_uniform_network_is_all_ties():
    # every feature has the same distribution under both classes
    rows = [("Y", BOOL, (), [0.5, 0.5])]
    for name in "ABC":
        rows.append((name, BOOL, ("Y",), [[0.3, 0.7], [0.3, 0.7]]))
    net = BayesNet.from_tables(rows)
    spec = ClassifierSpec(net, 0, (1, 2, 3))
    ft = ftree_for(spec)
    c0 = compile_class_formula(spec, ft, 0)
    c1 = compile_class_formula(spec, ft, 1)
    # every instance ties, and ties go to the lower class index
    assert len(enumerate_models(c0.store, c0.root, spec.features)) == 8
    assert enumerate_models(c1.store, c1.root, spec.features) == set()
    assert c0.stats.ties > 0
    assert c0.tie_log


def test_get_instances_conditionals(hub):
    spec, ft = hub
    ctx = CompileContext(spec, ft, 0, store=None)
    for q in range(len(ft)):
        if q == ft.root:
            continue
        inst = get_instances(ctx, q)
        # P(v | s) sums to one over v for every separator state s
        sums = inst.table.sum(axis=-1)
        np.testing.assert_allclose(sums, 1.0, rtol=1e-12)
        assert len(inst) == int(np.prod([spec.net.cards[f] for f in ft.V[q]]))
        keys = [tuple(a[f] for f in sorted(ft.V[q])) for a in inst.assignments]
        assert keys == sorted(keys)
        assert get_instances(ctx, q) is inst


def test_stats_record(hub):
    spec, ft = hub
    comp = compile_class_formula(spec, ft, 1)
    rec = dict(kv.split("=") for kv in comp.stats.record().split())
    assert rec["target_class"] == "1"
    assert int(rec["recursive_calls"]) >= 1
    assert int(rec["omega_T"]) == comp.stats.omega_T >= comp.stats.omega
    assert int(rec["nodes"]) == comp.store.size(comp.root)


def test_instance_cap(hub):
    spec, ft = hub
    with pytest.raises(CapExceeded):
        compile_class_formula(spec, ft, 0, cap=1)


def test_timeout(hub):
    spec, ft = hub
    with pytest.raises(CompileTimeout):
        compile_class_formula(spec, ft, 0, timeout=-1.0)


def test_bad_class_index(hub):
    spec, ft = hub
    with pytest.raises(ValueError):
        compile_class_formula(spec, ft, 2)


def test_nonbinary_hub_network():
    spec = hub_spec(5, cards={"D": 3, "E": 3, "B": 3})
    all_classes_match(spec, ftree_for(spec))


def test_leaf_evaluations_bounded(hub):
    spec, ft = hub
    comp = compile_class_formula(spec, ft, 0)
    total = int(np.prod(spec.feature_cards()))
    assert comp.stats.leaf_evaluations <= total
    # the root message is the class prior
    prior = project(ft.marginals[ft.root], [spec.target]).values
    np.testing.assert_allclose(prior.sum(), 1.0)
