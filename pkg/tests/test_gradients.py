import numpy as np
import pytest

from ceramic_pareto.bspline import BSplineBasis, fit_gamma
from ceramic_pareto.fem import BoundaryConditions, Material, solve_state
from ceramic_pareto.geometry import GridSpec, ShapeParams, build_grid
from ceramic_pareto.gradients import (
    chain_to_gamma,
    fd_gradient,
    grad_f1_nodes,
    grad_f2_nodes,
    rho_gradient,
)
from ceramic_pareto.objectives import AngularRule, intensity_measure, volume
from ceramic_pareto.problem import ShapeProblem

MAT = Material()
BC = BoundaryConditions()
RULE = AngularRule(64)


def max_rel(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def f1_of_nodes(mesh, nodes, bc=BC):
    moved = type(mesh)(nodes, mesh.elements, mesh.n_x, mesh.n_y, mesh.dirichlet_nodes,
                       mesh.neumann_fixed_edges, mesh.free_edges_upper, mesh.free_edges_lower)
    return intensity_measure(solve_state(moved, MAT, bc), MAT, RULE)


def small_mesh():
    spec = GridSpec.uniform(7, 4)
    x = spec.x_coords
    return build_grid(ShapeParams(0.08 * np.sin(np.pi * x), 0.2 + 0.05 * x), spec), spec


@pytest.fixture(scope="module")
def straight():
    spec = GridSpec.uniform(41, 7)
    basis = BSplineBasis.clamped_uniform(5, 0.0, 1.0)
    x = spec.x_coords
    gamma = fit_gamma(ShapeParams(0.15 * np.sin(np.pi * x), np.full(41, 0.2)), basis, x,
                      interpolate_ends=True).as_vector()
    return ShapeProblem(spec, basis), gamma


def test_node_gradient_matches_fd():
    mesh, _ = small_mesh()
    bc = BoundaryConditions(body_force=(2e5, -1e5), traction=(1e7, 2e6))
    st = solve_state(mesh, MAT, bc)
    g = grad_f1_nodes(mesh, MAT, bc, st, RULE)
    x0 = mesh.nodes.ravel()
    fd = fd_gradient(lambda v: f1_of_nodes(mesh, v.reshape(-1, 2), bc), x0, 1e-7).reshape(-1, 2)
    assert max_rel(g, fd) <= 1e-5


def test_zero_load_zero_gradient():
    mesh, _ = small_mesh()
    bc = BoundaryConditions(traction=(0.0, 0.0))
    st = solve_state(mesh, MAT, bc)
    assert not np.any(grad_f1_nodes(mesh, MAT, bc, st, RULE))


def test_volume_gradient_unit_square():
    mesh = build_grid(ShapeParams([0.0, 0.0], [1.0, 1.0]), GridSpec(2, 2, np.array([0.0, 1.0])))
    g = grad_f2_nodes(mesh)
    # moving the upper-right corner outward by dx or dy adds a triangle of area 1/2
    np.testing.assert_allclose(g[mesh.node_index(1, 1)], [0.5, 0.5])
    np.testing.assert_allclose(g[mesh.node_index(0, 0)], [-0.5, -0.5])
    np.testing.assert_allclose(g.sum(axis=0), 0.0, atol=1e-15)


def test_volume_gradient_matches_fd():
    mesh, _ = small_mesh()
    g = grad_f2_nodes(mesh)
    x0 = mesh.nodes.ravel()

    def vol(v):
        return volume(type(mesh)(v.reshape(-1, 2), mesh.elements, mesh.n_x, mesh.n_y,
                                 mesh.dirichlet_nodes, mesh.neumann_fixed_edges,
                                 mesh.free_edges_upper, mesh.free_edges_lower))

    np.testing.assert_allclose(g.ravel(), fd_gradient(vol, x0, 1e-6), atol=1e-9)


def test_translation_invariance():
    # without body forces a rigid translation leaves f1 unchanged
    mesh, _ = small_mesh()
    st = solve_state(mesh, MAT, BC)
    g = grad_f1_nodes(mesh, MAT, BC, st, RULE)
    assert abs(g.sum(axis=0)).max() <= 1e-8 * np.abs(g).max()


def test_rho_gradient_ignores_x_components():
    spec = GridSpec.uniform(5, 3)
    gx = np.zeros((15, 2))
    gx[:, 0] = np.arange(15.0)
    assert not np.any(rho_gradient(gx, spec))
    gy = np.zeros((15, 2))
    gy[:, 1] = 1.0
    r = rho_gradient(gy, spec)
    np.testing.assert_allclose(r[:5], 3.0)
    np.testing.assert_allclose(r[5:], 0.0, atol=1e-15)


def test_coefficient_gradients_match_fd(straight):
    problem, gamma = straight
    ev = problem.evaluate(gamma)
    g1, g2 = problem.gradients(ev, project=False)
    fd = fd_gradient(lambda v: problem.evaluate(v).f, gamma, 1e-6)
    assert max_rel(g1, fd[:, 0]) <= 1e-5
    assert max_rel(g2, fd[:, 1]) <= 1e-5
    # the volume is linear in the thickness coefficients
    np.testing.assert_allclose(g2[5:], fd[5:, 1], atol=1e-9)


def test_chain_equals_problem_gradient(straight):
    problem, gamma = straight
    ev = problem.evaluate(gamma)
    g1n, _ = problem.node_gradients(ev)
    np.testing.assert_array_equal(chain_to_gamma(g1n, problem.spec, problem.basis),
                                  problem.gradients(ev, project=False)[0])


def test_fd_error_decreases_with_eps(straight):
    problem, gamma = straight
    g1 = problem.gradients(problem.evaluate(gamma), project=False)[0]
    errs = [np.max(np.abs(fd_gradient(lambda v: problem.evaluate(v).f1, gamma, eps) - g1))
            for eps in (1e-2, 1e-3, 1e-4)]
    assert errs[0] > errs[1] > errs[2]


def test_second_order_taylor(straight):
    problem, gamma = straight
    ev = problem.evaluate(gamma)
    g1 = problem.gradients(ev, project=False)[0]
    rng = np.random.default_rng(0)
    v = rng.normal(size=gamma.size)
    v[5:] *= 0.1
    rem = []
    for h in (1e-3, 5e-4):
        rem.append(abs(problem.evaluate(gamma + h * v).f1 - ev.f1 - h * g1 @ v))
    # remainder shrinks quadratically
    assert rem[0] / rem[1] == pytest.approx(4.0, rel=0.1)


def test_projection_zeroes_fixed(straight):
    problem, gamma = straight
    fixed = ShapeProblem(problem.spec, problem.basis, fixed=ShapeProblem.end_coefficients(5))
    g1, g2 = fixed.gradients(fixed.evaluate(gamma))
    for g in (g1, g2):
        assert not np.any(g[[0, 4, 5, 9]])
        assert np.any(g[[1, 2, 3, 6, 7, 8]])


def test_fd_mode_agrees(straight):
    problem, gamma = straight
    fd = ShapeProblem(problem.spec, problem.basis, gradient_mode="fd")
    a = problem.gradients(problem.evaluate(gamma), project=False)
    b = fd.gradients(fd.evaluate(gamma), project=False)
    for x, y in zip(a, b):
        assert max_rel(x, y) <= 1e-5


def test_fd_gradient_shapes():
    assert fd_gradient(lambda v: v @ v, np.ones(3)).shape == (3,)
    out = fd_gradient(lambda v: np.array([v.sum(), v[0]]), np.ones(3))
    assert out.shape == (3, 2)
    np.testing.assert_allclose(out[:, 0], 1.0)
    with pytest.raises(ValueError):
        fd_gradient(np.sum, np.ones(2), eps=0.0)
