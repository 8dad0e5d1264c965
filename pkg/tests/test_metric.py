import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ceramic_pareto.errors import DegenerateFacet
from ceramic_pareto.geometry import GridSpec, ShapeParams, ul_matrix, ul_matrix_inverse
from ceramic_pareto.metric import curvature_adapt, curvature_field, discrete_curvature

SPEC = GridSpec.uniform(21, 5)
X = SPEC.x_coords


def bent_rho():
    return ShapeParams(0.3 * np.sin(2 * np.pi * X), 0.2 + 0.1 * X**2)


def test_straight_line_zero():
    pts = np.column_stack([np.linspace(0, 1, 10), 0.3 * np.linspace(0, 1, 10) + 1])
    np.testing.assert_allclose(discrete_curvature(pts), 0.0, atol=1e-12)


def test_circle():
    t = np.linspace(0.0, np.pi, 100)
    pts = 0.5 * np.column_stack([np.cos(t), np.sin(t)])
    kappa = discrete_curvature(pts)
    assert np.max(np.abs(kappa - 2.0)) <= 0.02


def test_right_angle():
    kappa = discrete_curvature([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    np.testing.assert_allclose(kappa, math.sqrt(2.0))


def test_degenerate_facet():
    with pytest.raises(DegenerateFacet):
        discrete_curvature([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])


def test_xi_zero_is_identity():
    g = np.random.default_rng(0).normal(size=42)
    out = curvature_adapt(g, bent_rho(), SPEC, 0.0)
    assert np.array_equal(out, g)
    assert out is not g


def test_straight_rod_is_identity():
    g = np.random.default_rng(1).normal(size=42)
    rho = ShapeParams(np.zeros(21), np.full(21, 0.2))
    assert np.array_equal(curvature_adapt(g, rho, SPEC, 1e-4), g)


def test_matches_conjugated_diagonal():
    rho = bent_rho()
    xi = 0.05
    w = curvature_field(rho, SPEC, xi).weights()
    A = ul_matrix_inverse(21) @ np.diag(w) @ ul_matrix(21)
    g = np.random.default_rng(2).normal(size=42)
    np.testing.assert_allclose(curvature_adapt(g, rho, SPEC, xi), A @ g, atol=1e-14)


def test_two_by_two_by_hand():
    # one boundary sample per side: M = [[1, 1/2], [1, -1/2]]
    M = ul_matrix(1)
    np.testing.assert_array_equal(M, [[1.0, 0.5], [1.0, -0.5]])
    D = np.diag([0.5, 1.0])
    A = np.linalg.inv(M) @ D @ M
    np.testing.assert_allclose(A, [[0.75, -0.125], [-0.5, 0.75]])


def test_weights_in_unit_interval():
    w = curvature_field(bent_rho(), SPEC, 1e-2).weights()
    assert np.all((w > 0) & (w <= 1))
    assert np.any(w < 1)


@settings(max_examples=30, deadline=None)
@given(
    arrays(float, 42, elements=st.floats(-1e3, 1e3)),
    arrays(float, 42, elements=st.floats(-1e3, 1e3)),
    st.floats(-5, 5),
)
def test_linearity(a, b, c):
    rho = bent_rho()
    lhs = curvature_adapt(a + c * b, rho, SPEC, 0.05)
    rhs = curvature_adapt(a, rho, SPEC, 0.05) + c * curvature_adapt(b, rho, SPEC, 0.05)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(arrays(float, 42, elements=st.floats(-1e3, 1e3)))
def test_preserves_descent(g):
    # the transformed gradient is a descent direction in the (upper, lower) metric
    rho = bent_rho()
    M = ul_matrix(21)
    out = curvature_adapt(g, rho, SPEC, 0.05)
    assert (M @ out) @ (M @ g) >= -1e-9
