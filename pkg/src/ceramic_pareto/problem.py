"""Objective/gradient evaluation of a B-spline shape, as used by the optimizers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bspline import BSplineBasis, BSplineCoeffs, basis_matrix, gamma_to_rho
from .fem import BoundaryConditions, Material, StateSolution, solve_state
from .geometry import TH_MIN, GridSpec, Mesh, ShapeParams, build_grid
from .gradients import fd_gradient, gamma_gradient, grad_f1_nodes, grad_f2_nodes, rho_gradient
from .metric import curvature_adapt
from .objectives import AngularRule, intensity_measure, volume


@dataclass(frozen=True, eq=False)
class Evaluation:
    gamma: np.ndarray
    f1: float
    f2: float
    rho: ShapeParams | None = None
    mesh: Mesh | None = None
    state: StateSolution | None = field(default=None, repr=False)

    @property
    def f(self):
        return np.array([self.f1, self.f2])


class ShapeProblem:
    """Maps B-spline coefficients to a mesh, solves the state and returns
    both objectives and their gradients.

    ``fixed`` lists coefficient indices that are held constant by the
    optimizers (their gradient entries are zeroed by :meth:`project`).
    """

    def __init__(self, spec: GridSpec, basis: BSplineBasis, mat: Material = Material(),
                 bc: BoundaryConditions = BoundaryConditions(), rule: AngularRule = AngularRule(),
                 th_min=TH_MIN, gradient_mode="adjoint", fd_eps=1e-6, fixed=(), solver_tol=1e-10):
        if gradient_mode not in ("adjoint", "fd"):
            raise ValueError(f"unknown gradient mode {gradient_mode!r}")
        self.spec = spec
        self.basis = basis
        self.mat = mat
        self.bc = bc
        self.rule = rule
        self.th_min = th_min
        self.gradient_mode = gradient_mode
        self.fd_eps = fd_eps
        self.solver_tol = solver_tol
        self.n_vars = 2 * basis.n_B
        self.fixed = np.asarray(sorted(fixed), dtype=int)
        self._B = basis_matrix(basis, spec.x_coords)

    @classmethod
    def end_coefficients(cls, n_B):
        """Indices of the first/last meanline and thickness coefficients."""
        return (0, n_B - 1, n_B, 2 * n_B - 1)

    def rho(self, gamma):
        return gamma_to_rho(BSplineCoeffs.from_vector(gamma), self.basis, self.spec.x_coords, self.th_min)

    def evaluate_rho(self, rho: ShapeParams, gamma=None):
        mesh = build_grid(rho, self.spec)
        state = solve_state(mesh, self.mat, self.bc, tol=self.solver_tol)
        f1 = intensity_measure(state, self.mat, self.rule)
        return Evaluation(gamma, f1, volume(mesh), rho, mesh, state)

    def evaluate(self, gamma):
        gamma = np.array(gamma, dtype=float)
        return self.evaluate_rho(self.rho(gamma), gamma)

    def node_gradients(self, ev: Evaluation):
        g1 = grad_f1_nodes(ev.mesh, self.mat, self.bc, ev.state, self.rule)
        return g1, grad_f2_nodes(ev.mesh)

    def rho_gradients(self, ev: Evaluation):
        if self.gradient_mode == "fd":
            def fun(r):
                n = self.spec.n_x
                return self.evaluate_rho(ShapeParams(r[:n], r[n:])).f
            g = fd_gradient(fun, ev.rho.as_vector(), self.fd_eps)
            return g[:, 0], g[:, 1]
        g1, g2 = self.node_gradients(ev)
        return rho_gradient(g1, self.spec), rho_gradient(g2, self.spec)

    def project(self, g):
        g = np.array(g, dtype=float)
        g[self.fixed] = 0.0
        return g

    def gradients(self, ev: Evaluation, xi=0.0, project=True):
        """Gradients of (f1, f2) w.r.t. the coefficients, curvature-adapted with ``xi``."""
        out = []
        for gr in self.rho_gradients(ev):
            if xi:
                gr = curvature_adapt(gr, ev.rho, self.spec, xi)
            g = gamma_gradient(gr, self.basis, self.spec)
            out.append(self.project(g) if project else g)
        return tuple(out)

    def step_bound(self, ev0: Evaluation, delta_factor):
        return delta_factor * ev0.rho.th[0] / self.spec.n_y

    def ml_shift(self, ev_old: Evaluation, ev_new: Evaluation):
        return float(np.max(np.abs(ev_new.rho.ml - ev_old.rho.ml)))


class FunctionProblem:
    """Adapter running the optimizers on plain callables.

    ``objectives(x) -> (f1, f2)`` and ``jacobian(x) -> (g1, g2)``; a callable
    may raise any :class:`~ceramic_pareto.errors.ShapeError` to mark ``x``
    infeasible.
    """

    def __init__(self, objectives, jacobian, n_vars, step_limit=np.inf, fixed=()):
        self._f = objectives
        self._g = jacobian
        self.n_vars = n_vars
        self.step_limit = step_limit
        self.fixed = np.asarray(sorted(fixed), dtype=int)

    def evaluate(self, gamma):
        gamma = np.array(gamma, dtype=float)
        f1, f2 = self._f(gamma)
        return Evaluation(gamma, float(f1), float(f2))

    def project(self, g):
        g = np.array(g, dtype=float)
        g[self.fixed] = 0.0
        return g

    def gradients(self, ev: Evaluation, xi=0.0, project=True):
        g1, g2 = self._g(ev.gamma)
        if not project:
            return np.asarray(g1, dtype=float), np.asarray(g2, dtype=float)
        return self.project(g1), self.project(g2)

    def step_bound(self, ev0, delta_factor):
        return self.step_limit

    def ml_shift(self, ev_old, ev_new):
        return float("nan")
