"""Shape gradients of both objectives with respect to node positions and
B-spline coefficients.

The intensity-measure gradient is the exact derivative of the discrete
functional, obtained through the Lagrangian

    L(X, u, psi) = J(X, u) + psi^T (b(X) - K(X) u)

with ``K psi = dJ/du``. Every element term is a function of the element
area and the constant displacement gradients, whose variation under an
affine node perturbation ``V`` is ``dA = A tr(DV)`` and ``d(Du) = -Du DV``.
"""
from __future__ import annotations

import numpy as np

from .bspline import BSplineBasis, basis_matrix
from .errors import SolveFailure
from .fem import (
    BoundaryConditions,
    Material,
    StateSolution,
    displacement_gradient,
    shape_gradients,
    stress_from_grad,
)
from .geometry import GridSpec, Mesh
from .objectives import AngularRule, stress_hazard


def _scatter(elements, contrib, n_nodes):
    out = np.zeros((n_nodes, 2))
    np.add.at(out, elements.ravel(), contrib.reshape(-1, 2))
    return out


def _adjoint(state: StateSolution, rhs):
    psi = np.zeros(rhs.size)
    f = state.free_dofs
    if np.any(rhs[f]):
        psi[f] = state.factor.solve(rhs[f])
        if not np.all(np.isfinite(psi)):
            raise SolveFailure("adjoint solve produced non-finite values")
    return psi.reshape(-1, 2)


def grad_f1_nodes(mesh: Mesh, mat: Material, bc: BoundaryConditions, state: StateSolution,
                  rule: AngularRule = AngularRule()):
    """Total derivative of the intensity measure w.r.t. every node coordinate."""
    area, g = shape_gradients(mesh.nodes, mesh.elements)
    Du = state.disp_grad
    sig_u = state.element_stress
    h, dh = stress_hazard(sig_u, mat, rule, derivative=True)

    # C : dh/dsigma, the sensitivity of h to the displacement gradient
    T = 2.0 * mat.mu * dh
    tr = dh[:, 0, 0] + dh[:, 1, 1]
    T[:, 0, 0] += mat.lam * tr
    T[:, 1, 1] += mat.lam * tr

    rhs = _scatter(mesh.elements, area[:, None, None] * np.einsum("eij,eaj->eai", T, g), mesh.n_nodes)
    psi = _adjoint(state, rhs.ravel())

    Dpsi = displacement_gradient(g, mesh.elements, psi)
    sig_psi = stress_from_grad(Dpsi, mat)
    phi = h - np.einsum("eij,eij->e", sig_u, Dpsi)
    tDu = np.swapaxes(Du, 1, 2)
    tDpsi = np.swapaxes(Dpsi, 1, 2)
    Sigma = -tDu @ (T - sig_psi) + tDpsi @ sig_u
    Sigma[:, 0, 0] += phi
    Sigma[:, 1, 1] += phi
    grad = _scatter(
        mesh.elements, area[:, None, None] * np.einsum("eij,eaj->eai", Sigma, g), mesh.n_nodes
    )

    # psi^T b(X): traction line integrals and body-force area weights
    gt = np.asarray(bc.traction, dtype=float)
    if np.any(gt):
        e = mesh.neumann_fixed_edges
        t = mesh.nodes[e[:, 1]] - mesh.nodes[e[:, 0]]
        length = np.linalg.norm(t, axis=1)
        coef = 0.5 * (psi[e[:, 0]] + psi[e[:, 1]]) @ gt
        d = (coef / length)[:, None] * t
        np.add.at(grad, e[:, 1], d)
        np.add.at(grad, e[:, 0], -d)
    f = np.asarray(bc.body_force, dtype=float)
    if np.any(f):
        coef = psi[mesh.elements].sum(axis=1) @ f / 3.0
        grad += _scatter(mesh.elements, (coef * area)[:, None, None] * g, mesh.n_nodes)
    return grad


def grad_f2_nodes(mesh: Mesh):
    """Derivative of the total triangle area w.r.t. every node coordinate."""
    area, g = shape_gradients(mesh.nodes, mesh.elements)
    return _scatter(mesh.elements, area[:, None, None] * g, mesh.n_nodes)


def rho_gradient(gradX, spec: GridSpec):
    """Pull a node gradient back to (meanline, thickness); x-components are dropped."""
    gy = np.asarray(gradX)[:, 1].reshape(spec.n_x, spec.n_y)
    return np.concatenate([gy.sum(axis=1), gy @ spec.levels])


def gamma_gradient(grad_rho, basis: BSplineBasis, spec: GridSpec):
    B = basis_matrix(basis, spec.x_coords)
    n = spec.n_x
    return np.concatenate([B.T @ grad_rho[:n], B.T @ grad_rho[n:]])


def chain_to_gamma(gradX, spec: GridSpec, basis: BSplineBasis):
    return gamma_gradient(rho_gradient(gradX, spec), basis, spec)


def fd_gradient(fun, gamma, eps=1e-6):
    """Central finite differences of ``fun`` at ``gamma``.

    ``fun`` may return a scalar or a 1-D array of k values; the result then
    has shape ``(n,)`` or ``(n, k)``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    gamma = np.asarray(gamma, dtype=float)
    cols = []
    for j in range(gamma.size):
        e = np.zeros_like(gamma)
        e[j] = eps
        cols.append((np.asarray(fun(gamma + e)) - np.asarray(fun(gamma - e))) / (2 * eps))
    return np.array(cols, dtype=float)
