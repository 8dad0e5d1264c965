"""Linear elasticity on P1 triangles: assembly, solve and stress recovery."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import DegenerateElement, SolveFailure
from .geometry import Mesh, signed_areas


@dataclass(frozen=True)
class Material:
    E: float = 320e9
    nu: float = 0.25
    m: float = 5.0
    sigma0: float = 2.4e7
    uts: float = 140e6

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError("Young's modulus must be positive")
        if not 0 < self.nu < 0.5:
            raise ValueError("Poisson ratio must lie in (0, 0.5)")
        if not self.m >= 1:
            raise ValueError("Weibull module must be >= 1")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")

    @property
    def lam(self):
        return self.nu * self.E / ((1 + self.nu) * (1 - 2 * self.nu))

    @property
    def mu(self):
        return self.E / (2 * (1 + self.nu))


@dataclass(frozen=True)
class BoundaryConditions:
    body_force: tuple = (0.0, 0.0)  # N/m^3
    traction: tuple = (1e7, 0.0)  # Pa, on the right column

    def __post_init__(self):
        if not (np.all(np.isfinite(self.body_force)) and np.all(np.isfinite(self.traction))):
            raise ValueError("loads must be finite")

    def scaled(self, factor):
        return BoundaryConditions(
            tuple(factor * np.asarray(self.body_force, dtype=float)),
            tuple(factor * np.asarray(self.traction, dtype=float)),
        )


@dataclass(frozen=True, eq=False)
class StateSolution:
    u: np.ndarray  # (n_nodes, 2)
    element_stress: np.ndarray  # (n_elem, 2, 2)
    element_area: np.ndarray
    disp_grad: np.ndarray  # (n_elem, 2, 2), constant per element
    free_dofs: np.ndarray = field(repr=False)
    factor: object = field(repr=False)  # factorization of the reduced stiffness


def shape_gradients(nodes, elements):
    """Areas and constant P1 basis-function gradients, shape ``(n_elem, 3, 2)``."""
    p = nodes[elements]
    x, y = p[..., 0], p[..., 1]
    b = np.roll(y, -1, axis=1) - np.roll(y, -2, axis=1)
    c = np.roll(x, -2, axis=1) - np.roll(x, -1, axis=1)
    area = signed_areas(nodes, elements)
    grads = np.stack([b, c], axis=-1) / (2.0 * area[:, None, None])
    return area, grads


def displacement_gradient(grads, elements, u):
    return np.einsum("eai,eaj->eij", u[elements], grads)


def stress_from_grad(Du, mat: Material):
    tr = Du[:, 0, 0] + Du[:, 1, 1]
    sig = mat.mu * (Du + np.swapaxes(Du, 1, 2))
    sig[:, 0, 0] += mat.lam * tr
    sig[:, 1, 1] += mat.lam * tr
    return sig


def element_stiffness(area, grads, mat: Material):
    """Element matrices ``(n_elem, 6, 6)``, dofs ordered (node0 x, node0 y, node1 x, ...)."""
    g = grads
    gg = np.einsum("eak,ebk->eab", g, g)
    K = mat.lam * np.einsum("eai,ebk->eaibk", g, g)
    K += mat.mu * np.einsum("eab,ik->eaibk", gg, np.eye(2))
    K += mat.mu * np.einsum("eak,ebi->eaibk", g, g)
    return area[:, None, None] * K.reshape(-1, 6, 6)


def element_dofs(elements):
    return (2 * elements[:, :, None] + np.arange(2)).reshape(-1, 6)


def load_vector(mesh: Mesh, bc: BoundaryConditions, area=None):
    n = mesh.n_nodes
    b = np.zeros((n, 2))
    f = np.asarray(bc.body_force, dtype=float)
    if np.any(f):
        if area is None:
            area = mesh.element_areas()
        np.add.at(b, mesh.elements.ravel(), np.repeat(area / 3.0, 3)[:, None] * f)
    g = np.asarray(bc.traction, dtype=float)
    if np.any(g):
        e = mesh.neumann_fixed_edges
        length = np.linalg.norm(mesh.nodes[e[:, 1]] - mesh.nodes[e[:, 0]], axis=1)
        np.add.at(b, e.ravel(), np.repeat(0.5 * length, 2)[:, None] * g)
    return b.ravel()


def assemble(mesh: Mesh, mat: Material, bc: BoundaryConditions):
    """Global stiffness (CSR, no boundary conditions applied) and load vector."""
    area, grads = shape_gradients(mesh.nodes, mesh.elements)
    if np.any(area <= 0):
        raise DegenerateElement(f"element {int(np.argmin(area))} has area {area.min():.3e}")
    Ke = element_stiffness(area, grads, mat)
    dofs = element_dofs(mesh.elements)
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    ndof = 2 * mesh.n_nodes
    K = sp.csr_matrix((Ke.ravel(), (rows, cols)), shape=(ndof, ndof))
    # exact symmetry regardless of summation order
    K = (K + K.T) * 0.5
    return K, load_vector(mesh, bc, area)


def free_dof_mask(mesh: Mesh):
    mask = np.ones(2 * mesh.n_nodes, dtype=bool)
    mask[2 * mesh.dirichlet_nodes] = False
    mask[2 * mesh.dirichlet_nodes + 1] = False
    return mask


def solve_state(mesh: Mesh, mat: Material, bc: BoundaryConditions, tol=1e-10) -> StateSolution:
    K, b = assemble(mesh, mat, bc)
    free = np.flatnonzero(free_dof_mask(mesh))
    Kff = K[free][:, free].tocsc()
    bf = b[free]
    u = np.zeros(2 * mesh.n_nodes)
    try:
        lu = splu(Kff)
    except RuntimeError as exc:
        raise SolveFailure(f"factorization failed: {exc}") from exc
    if np.any(bf):
        uf = lu.solve(bf)
        res = np.linalg.norm(Kff @ uf - bf) / np.linalg.norm(bf)
        if not np.isfinite(res) or res > tol:
            raise SolveFailure(f"relative residual {res:.2e} exceeds {tol:.0e}")
        u[free] = uf
    u = u.reshape(-1, 2)
    area, grads = shape_gradients(mesh.nodes, mesh.elements)
    Du = displacement_gradient(grads, mesh.elements, u)
    return StateSolution(u, stress_from_grad(Du, mat), area, Du, free, lu)


def element_stress(mesh: Mesh, u, e, mat: Material):
    """Constant stress tensor of element ``e`` for the nodal displacements ``u``."""
    u = np.asarray(u, dtype=float).reshape(-1, 2)
    el = mesh.elements[e : e + 1]
    _, grads = shape_gradients(mesh.nodes, el)
    return stress_from_grad(displacement_gradient(grads, el, u), mat)[0]
