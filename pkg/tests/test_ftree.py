import pytest

from bncx.errors import StructuralError
from bncx.fixtures import hub_jointree, hub_spec, random_bnc
from bncx.ftree import NONE, compilation_width, extract_ftree, orient, split_partition
from bncx.jointree import calibrate, from_clusters, normalize_shape

from conftest import ftree_for


@pytest.fixture(scope="module")
def hub_ft():
    spec = hub_spec(0)
    return spec, extract_ftree(hub_jointree(spec.net), spec)


def test_hub_structure(hub_ft):
    spec, ft = hub_ft
    # root is the A,B,C cluster; the A,B,G cluster is not needed
    assert ft.clusters[ft.root] == frozenset({0, 1, 2})
    assert 4 not in ft.jt_node
    assert ft.sep[ft.root] == {spec.target}
    assert ft.V[ft.root] == frozenset(spec.features)
    assert sorted(ft.preorder()) == list(range(len(ft)))
    for q in range(len(ft)):
        if ft.clusters[q] & set(spec.features):
            assert ft.is_leaf(q)


def test_hub_width_with_stated_orientation(hub_ft):
    _, ft = hub_ft
    bd, bc, bce = ft.index_of(3), ft.index_of(2), ft.index_of(1)
    oriented = orient(ft, {ft.root: bd, bc: bce})
    rep = compilation_width(oriented)
    assert (rep.omega, rep.omega_R, rep.omega_L, rep.omega_T) == (2, 5, 3, 5)
    assert rep.R == (ft.root, bc, ft.index_of(0))


def test_split_partition(hub_ft):
    spec, ft = hub_ft
    D, E, F = spec.features
    bd = ft.index_of(3)
    assert split_partition(ft, (ft.root, bd)) == (frozenset({E, F}), frozenset({D}))
    assert split_partition(ft, (bd, ft.root)) == (frozenset({E, F}), frozenset({D}))
    bc = ft.index_of(2)
    assert split_partition(ft, (ft.root, bc)) == (frozenset({D}), frozenset({E, F}))
    with pytest.raises(StructuralError):
        split_partition(ft, (bd, bc))


def test_orient_rejects_non_child(hub_ft):
    _, ft = hub_ft
    with pytest.raises(StructuralError):
        orient(ft, {ft.root: ft.root})


def test_extract_requires_calibration():
    spec = hub_spec(0)
    with pytest.raises(StructuralError):
        extract_ftree(hub_jointree(spec.net, calibrated=False), spec)


def test_extract_requires_single_feature_holder():
    spec = hub_spec(0)
    net = spec.net
    clusters = [[net.index(c) for c in cl] for cl in ("BCF", "BCE", "BCD", "BD", "ABG", "ABC")]
    jt = calibrate(from_clusters(net, clusters, [(5, 2), (5, 4), (2, 0), (2, 1), (2, 3)]), net)
    with pytest.raises(StructuralError, match="exactly one cluster"):
        extract_ftree(jt, spec)
    fixed = normalize_shape(jt, spec.features, spec.target)
    assert compilation_width(extract_ftree(fixed, spec)).omega_T >= 2


def test_explicit_root_must_hold_target():
    spec = hub_spec(0)
    jt = hub_jointree(spec.net)
    with pytest.raises(StructuralError):
        extract_ftree(jt, spec, root=0)


@pytest.mark.parametrize("seed", range(30))
def test_random_ftrees(seed):
    spec = random_bnc(seed)
    ft = ftree_for(spec)
    assert spec.target in ft.clusters[ft.root]
    covered = set().union(*ft.clusters)
    assert covered >= set(spec.features) | {spec.target}
    for q in range(len(ft)):
        assert len(ft.children(q)) <= 2
        if ft.left[q] != NONE:
            assert ft.right[q] != NONE
        kids = ft.children(q)
        assert ft.V[q] == (ft.clusters[q] & set(spec.features)).union(*(ft.V[c] for c in kids))
    rep = compilation_width(ft)
    assert rep.omega_T <= rep.omega + len(spec.features)
    assert rep.omega_T == max(rep.omega, rep.omega_R, rep.omega_L)
