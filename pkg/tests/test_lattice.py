import itertools

import numpy as np
import pytest
from scipy.linalg import expm
from hypothesis import given, settings, strategies as st

from latwalk.lattice import (EnumerationBudgetExceeded, GroupElement, LatticePoint, SingularBasisError,
                             apply_group, enumerate_short_vectors, height, hermite_bound,
                             minkowski_constant, reduce_basis, shortest_vector_length,
                             successive_minima)

H1 = np.array([[1, 1], [0, 1]])


def random_sl(rng, d, spread=1.0):
    m = rng.standard_normal((d, d)) * spread + np.eye(d)
    if np.linalg.det(m) < 0:
        m[:, 0] *= -1
    return m / abs(np.linalg.det(m)) ** (1 / d)


def brute_lambda1(basis, box=20):
    """min |B c| over integer c in [-box, box]^d (vectorized per leading coordinate)."""
    d = basis.shape[0]
    rng = np.arange(-box, box + 1)
    best = np.inf
    grids = np.array(list(itertools.product(rng, repeat=d - 1))) if d > 1 else np.zeros((1, 0))
    for c0 in rng:
        c = np.column_stack([np.full(len(grids), c0), grids])
        c = c[np.any(c != 0, axis=1)]
        v = c @ basis.T
        best = min(best, np.sqrt(np.min(np.einsum("ij,ij->i", v, v))))
    return best


def test_group_element_renormalizes():
    g = GroupElement(np.diag([2.0, 0.5]) * (1 + 1e-9))
    assert abs(np.linalg.det(g.entries) - 1) <= 1e-12
    with pytest.raises(ValueError):
        GroupElement(np.diag([2.0, 1.0]))


def test_products_stay_unimodular():
    rng = np.random.default_rng(3)
    g = GroupElement(random_sl(rng, 3))
    p = GroupElement.identity(3)
    for _ in range(200):
        p = p @ g
        p = p @ g.inverse()
    assert abs(np.linalg.det(p.entries) - 1) <= 1e-9
    assert p.allclose(GroupElement.identity(3), 1e-6)


def test_apply_group_examples():
    z2 = LatticePoint.standard(2)
    assert apply_group(GroupElement.identity(2), z2).same_lattice(z2)
    hz = apply_group(GroupElement(H1), z2)
    assert hz.same_lattice(z2) and hz.lambda1 == pytest.approx(1.0)
    dz = apply_group(GroupElement.diag(4, 0.25), z2)
    assert dz.lambda1 == pytest.approx(0.25)
    with pytest.raises(ValueError):
        apply_group(GroupElement.identity(3), z2)


def test_reduce_basis_examples():
    red, u = reduce_basis(np.array([[1.0, 5.0], [0.0, 1.0]]))
    assert np.allclose(np.abs(red), np.eye(2)) or np.allclose(np.abs(red), np.eye(2)[::-1])
    again, u2 = reduce_basis(red)
    assert np.allclose(again, red) and np.allclose(u2, np.eye(2))
    red, _ = reduce_basis(np.diag([4.0, 0.25]))
    assert np.allclose(red[:, 0], [0, 0.25])


def test_singular_basis_rejected():
    with pytest.raises(SingularBasisError):
        reduce_basis(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SingularBasisError):
        reduce_basis(np.diag([1e7, 1e-7]))


def test_shortest_vector_and_minima_examples():
    assert shortest_vector_length(LatticePoint.standard(4)) == pytest.approx(1.0)
    d4 = LatticePoint(np.diag([4.0, 0.25]))
    assert d4.lambda1 == pytest.approx(0.25)
    assert np.allclose(successive_minima(d4), [0.25, 4])
    assert np.allclose(successive_minima(LatticePoint.standard(2)), [1, 1])
    t = 2.0
    m3 = successive_minima(LatticePoint(np.diag([t, t, 1 / t**2])))
    assert np.allclose(m3, [0.25, 2, 2])
    assert height(d4) == pytest.approx(4.0)
    assert height(LatticePoint.standard(2)) == pytest.approx(1.0)


def test_enumeration_closed_ball_and_budget():
    _, v = enumerate_short_vectors(np.eye(2), 1.0)
    assert len(v) == 4
    _, v = enumerate_short_vectors(np.eye(2), np.sqrt(2))
    assert len(v) == 8
    with pytest.raises(EnumerationBudgetExceeded):
        enumerate_short_vectors(np.eye(3), 30.0, budget=1000)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_shortest_vector_matches_brute_force(d):
    rng = np.random.default_rng(100 + d)
    count = {2: 40, 3: 40, 4: 20}[d]
    box = {2: 20, 3: 20, 4: 8}[d]
    for _ in range(count):
        x = LatticePoint(random_sl(rng, d, 0.6))
        assert x.lambda1 == pytest.approx(brute_lambda1(x.reduced_basis, box), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_reduction_preserves_lattice(seed, d):
    rng = np.random.default_rng(seed)
    x = LatticePoint(random_sl(rng, d, 1.5))
    u = x.unimodular
    assert np.all(np.abs(u - np.round(u)) <= 1e-6)
    assert abs(abs(np.linalg.det(u)) - 1) <= 1e-6
    assert np.allclose(x.basis @ u, x.reduced_basis, atol=1e-8)
    # deterministic normalization
    assert np.allclose(LatticePoint(x.reduced_basis).reduced_basis, x.reduced_basis)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_minkowski_bounds(seed, d):
    rng = np.random.default_rng(seed)
    x = LatticePoint(random_sl(rng, d, 1.0))
    assert x.lambda1 <= hermite_bound(d) + 1e-9
    m = x.minima
    assert np.all(np.diff(m) >= -1e-12)
    prod = float(np.prod(m))
    c = minkowski_constant(d)
    assert 1 / c - 1e-9 <= prod <= c + 1e-9
    assert x.height >= hermite_bound(d) ** -1 - 1e-12


def test_hermite_bound_d2():
    assert hermite_bound(2) ** 2 == pytest.approx(2 / np.sqrt(3))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_operator_norm_inequality(seed, d):
    rng = np.random.default_rng(seed)
    x = LatticePoint(random_sl(rng, d))
    g = GroupElement(random_sl(rng, d, 0.5))
    assert apply_group(g, x).lambda1 <= g.op_norm() * x.lambda1 * (1 + 1e-9)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_height_variation_near_identity(seed, d):
    rng = np.random.default_rng(seed)
    x = LatticePoint(random_sl(rng, d))
    a = rng.standard_normal((d, d))
    a -= np.trace(a) / d * np.eye(d)
    a *= 0.05 / np.linalg.norm(a, 2)
    g = GroupElement(expm(a))
    assert np.linalg.norm(g.entries - np.eye(d), 2) <= 0.1
    assert x.height <= 2 * g.inverse().op_norm() * apply_group(g, x).height


def test_integral_elements_reduce_mod_q():
    g = GroupElement(H1)
    assert g.is_integral
    assert np.array_equal(g.mod(2), [[1, 1], [0, 1]])
    assert np.array_equal((g ** 2).mod(2), np.eye(2))
    with pytest.raises(ValueError):
        GroupElement.diag(2.0, 0.5).mod(2)
