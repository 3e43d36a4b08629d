import numpy as np
import pytest

from bncx.errors import NumericalError, StructuralError
from bncx.factor import Factor, allclose, divide, multiply, multiply_all, project, restrict, safe_divide


def rand_factor(rng, scope, cards):
    return Factor.new(scope, cards, rng.random(cards))


def test_new_sorts_scope(rng):
    vals = rng.random((2, 3))
    f = Factor.new((5, 1), (2, 3), vals)
    assert f.scope == (1, 5)
    assert f.cards == (3, 2)
    np.testing.assert_array_equal(f.values, vals.T)


def test_new_rejects_bad_values():
    with pytest.raises(StructuralError):
        Factor.new((0,), (2,), [0.5, -0.1])
    with pytest.raises(StructuralError):
        Factor.new((0,), (2,), [np.nan, 1.0])
    with pytest.raises(StructuralError):
        Factor.new((0, 0), (2, 2), np.ones((2, 2)))


def test_multiply_matches_einsum(rng):
    a = rand_factor(rng, (0, 2), (2, 3))
    b = rand_factor(rng, (1, 2), (4, 3))
    out = multiply(a, b)
    assert out.scope == (0, 1, 2)
    np.testing.assert_allclose(out.values, np.einsum("ac,bc->abc", a.values, b.values))


def test_multiply_cardinality_clash(rng):
    with pytest.raises(StructuralError):
        multiply(rand_factor(rng, (0,), (2,)), rand_factor(rng, (0,), (3,)))


def test_multiply_all_empty_is_unit():
    assert multiply_all([]).total() == 1.0


def test_project_sums(rng):
    a = rand_factor(rng, (0, 1, 2), (2, 3, 2))
    p = project(a, [1])
    np.testing.assert_allclose(p.values, a.values.sum(axis=(0, 2)))
    assert project(a, [0, 1, 2]) is a
    with pytest.raises(StructuralError):
        project(a, [7])


def test_safe_divide_zero_over_zero():
    out = safe_divide(np.array([0.0, 2.0]), np.array([0.0, 4.0]))
    np.testing.assert_array_equal(out, [0.0, 0.5])
    with pytest.raises(NumericalError):
        safe_divide(np.array([1.0]), np.array([0.0]))


def test_divide_recovers_conditional(rng):
    joint = rand_factor(rng, (0, 1), (2, 3))
    cond = divide(joint, project(joint, [0]))
    np.testing.assert_allclose(project(cond, [0]).values, 1.0)
    with pytest.raises(StructuralError):
        divide(project(joint, [0]), joint)


def test_restrict(rng):
    a = rand_factor(rng, (0, 1), (2, 3))
    r = restrict(a, {1: 2})
    assert r.scope == (0,)
    np.testing.assert_array_equal(r.values, a.values[:, 2])
    assert restrict(a, {9: 0}) is a
    with pytest.raises(StructuralError):
        restrict(a, {0: 5})


def test_allclose_scope_mismatch(rng):
    a = rand_factor(rng, (0,), (2,))
    b = rand_factor(rng, (1,), (2,))
    assert not allclose(a, b)
    assert allclose(a, a)
