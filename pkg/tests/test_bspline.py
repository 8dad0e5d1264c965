import numpy as np
import pytest
from scipy.interpolate import BSpline

from ceramic_pareto.bspline import (
    BSplineBasis,
    BSplineCoeffs,
    basis_matrix,
    fit_gamma,
    gamma_to_rho,
    rho_jacobian,
)
from ceramic_pareto.errors import NonPositiveThickness, OutOfDomain
from ceramic_pareto.geometry import GridSpec, ShapeParams

X = np.linspace(0.0, 1.0, 41)


@pytest.fixture
def cubic():
    return BSplineBasis.clamped_uniform(5, 0.0, 1.0)


def test_partition_of_unity_dense(cubic):
    x = np.linspace(0, 1, 10_000)
    B = basis_matrix(cubic, x)
    assert np.max(np.abs(B.sum(axis=1) - 1)) <= 1e-12
    assert B.min() >= 0.0


def test_clamped_ends(cubic):
    B = basis_matrix(cubic, [0.0, 1.0])
    np.testing.assert_array_equal(B[0], [1, 0, 0, 0, 0])
    np.testing.assert_array_equal(B[1], [0, 0, 0, 0, 1])


def test_degree_zero_by_hand():
    basis = BSplineBasis.clamped_uniform(2, 0.0, 1.0, degree=0)
    np.testing.assert_array_equal(basis.knots, [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(basis_matrix(basis, [0.25, 0.75]), [[1, 0], [0, 1]])


@pytest.mark.parametrize("n_B, degree", [(5, 3), (7, 3), (6, 2), (4, 1)])
def test_matches_scipy_design_matrix(n_B, degree):
    basis = BSplineBasis.clamped_uniform(n_B, 0.0, 1.0, degree=degree)
    ref = BSpline.design_matrix(X, basis.knots, degree).toarray()
    np.testing.assert_allclose(basis_matrix(basis, X), ref, atol=1e-14)


def test_out_of_domain(cubic):
    with pytest.raises(OutOfDomain):
        basis_matrix(cubic, [-0.1, 0.5])


def test_constant_coefficients(cubic):
    rho = gamma_to_rho(BSplineCoeffs(np.zeros(5), 0.3 * np.ones(5)), cubic, X)
    np.testing.assert_allclose(rho.ml, 0.0)
    np.testing.assert_allclose(rho.th, 0.3)


def test_negative_thickness(cubic):
    with pytest.raises(NonPositiveThickness):
        gamma_to_rho(BSplineCoeffs(np.zeros(5), [0.2, 0.2, -1.0, 0.2, 0.2]), cubic, X)


def test_fit_recovers_spline_space(cubic):
    rng = np.random.default_rng(4)
    gamma = BSplineCoeffs(rng.normal(size=5) * 0.1, rng.uniform(0.1, 0.3, 5))
    rho = gamma_to_rho(gamma, cubic, X)
    for ends in (False, True):
        fitted = fit_gamma(rho, cubic, X, interpolate_ends=ends)
        back = gamma_to_rho(fitted, cubic, X)
        np.testing.assert_allclose(back.ml, rho.ml, atol=1e-10)
        np.testing.assert_allclose(back.th, rho.th, atol=1e-10)


def test_fit_constant(cubic):
    gamma = fit_gamma(ShapeParams(np.full(41, 0.05), np.full(41, 0.2)), cubic, X)
    np.testing.assert_allclose(gamma.ml, 0.05, atol=1e-14)
    np.testing.assert_allclose(gamma.th, 0.2, atol=1e-14)


def test_fit_with_pinned_ends(cubic):
    rho = ShapeParams(0.15 * np.sin(np.pi * X), np.full(41, 0.2))
    gamma = fit_gamma(rho, cubic, X, interpolate_ends=True)
    assert gamma.ml[0] == 0.0
    assert gamma.ml[-1] == rho.ml[-1]


def test_jacobian_matches_fd(cubic):
    rng = np.random.default_rng(5)
    g0 = np.concatenate([rng.normal(size=5) * 0.1, rng.uniform(0.1, 0.3, 5)])
    J = rho_jacobian(cubic, X)
    assert J.shape == (82, 10)
    eps = 1e-6
    for j in range(10):
        e = np.zeros(10)
        e[j] = eps
        hi = gamma_to_rho(BSplineCoeffs.from_vector(g0 + e), cubic, X).as_vector()
        lo = gamma_to_rho(BSplineCoeffs.from_vector(g0), cubic, X).as_vector()
        np.testing.assert_allclose((hi - lo) / eps, J[:, j], atol=1e-8)
    B = basis_matrix(cubic, X)
    np.testing.assert_allclose(J[:41, :5].sum(axis=0), B.sum(axis=0))


def test_linearity(cubic):
    rng = np.random.default_rng(6)
    g1 = BSplineCoeffs(rng.normal(size=5), rng.uniform(1, 2, 5))
    g2 = BSplineCoeffs(rng.normal(size=5), rng.uniform(1, 2, 5))
    a, b = 0.7, 1.9
    mix = BSplineCoeffs(a * g1.ml + b * g2.ml, a * g1.th + b * g2.th)
    lhs = gamma_to_rho(mix, cubic, X).as_vector()
    rhs = a * gamma_to_rho(g1, cubic, X).as_vector() + b * gamma_to_rho(g2, cubic, X).as_vector()
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_coefficient_step_bound(cubic):
    rng = np.random.default_rng(7)
    B = basis_matrix(cubic, X)
    for _ in range(200):
        d = rng.normal(size=5)
        assert np.max(np.abs(B @ d)) <= np.max(np.abs(d)) + 1e-15


def test_smoothing_changes_intensity(cubic):
    from ceramic_pareto.problem import ShapeProblem

    # a sharp bump is poorly represented by five basis functions
    spec = GridSpec.uniform(41, 7)
    ml = 0.1 * np.exp(-(((X - 0.3) / 0.05) ** 2))
    rho = ShapeParams(ml, np.full(41, 0.2))
    problem = ShapeProblem(spec, cubic)
    raw = problem.evaluate_rho(rho).f1
    smooth = problem.evaluate(fit_gamma(rho, cubic, X).as_vector()).f1
    assert abs(smooth - raw) / raw > 0.05
