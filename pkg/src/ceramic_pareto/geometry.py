"""Structured triangle meshes built from meanline/thickness shape parameters.

Nodes are stored column by column: node ``(i, j)`` has index ``i * n_y + j``
(0-based), ``i`` running along x and ``j`` from the lower to the upper face.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCell, NonPositiveThickness

TH_MIN = 1e-4


@dataclass(frozen=True)
class GridSpec:
    n_x: int
    n_y: int
    x_coords: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x_coords, dtype=float)
        if self.n_x < 2 or self.n_y < 2:
            raise ValueError("grid needs n_x >= 2 and n_y >= 2")
        if x.shape != (self.n_x,):
            raise ValueError(f"expected {self.n_x} x-coordinates, got {x.shape}")
        h = np.diff(x)
        if np.any(h <= 0):
            raise ValueError("x-coordinates must be strictly increasing")
        if np.max(np.abs(h - h[0])) > 1e-12 * abs(h[0]):
            raise ValueError("x-coordinates must be equidistant")
        object.__setattr__(self, "x_coords", x)

    @classmethod
    def uniform(cls, n_x, n_y, length=1.0, x0=0.0):
        return cls(n_x, n_y, np.linspace(x0, x0 + length, n_x))

    @property
    def levels(self):
        """Relative position of every row in the column, ``(j - (n_y-1)/2) / (n_y-1)``."""
        j = np.arange(self.n_y)
        return (j - 0.5 * (self.n_y - 1)) / (self.n_y - 1)


@dataclass(frozen=True)
class ShapeParams:
    ml: np.ndarray
    th: np.ndarray

    def __post_init__(self):
        ml = np.asarray(self.ml, dtype=float)
        th = np.asarray(self.th, dtype=float)
        if ml.shape != th.shape or ml.ndim != 1:
            raise ValueError("meanline and thickness must be 1-D arrays of equal length")
        object.__setattr__(self, "ml", ml)
        object.__setattr__(self, "th", th)

    def as_vector(self):
        return np.concatenate([self.ml, self.th])


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray  # (n_x*n_y, 2)
    elements: np.ndarray  # (n_elem, 3), counterclockwise
    n_x: int
    n_y: int
    dirichlet_nodes: np.ndarray
    neumann_fixed_edges: np.ndarray  # (n_y-1, 2)
    free_edges_upper: np.ndarray
    free_edges_lower: np.ndarray

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    def node_index(self, i, j):
        return i * self.n_y + j

    def element_areas(self):
        return signed_areas(self.nodes, self.elements)

    def boundary_edges(self):
        """All boundary edges, Dirichlet column included."""
        left = np.column_stack([np.arange(self.n_y - 1), np.arange(1, self.n_y)])
        return np.vstack(
            [left, self.neumann_fixed_edges, self.free_edges_upper, self.free_edges_lower]
        )


def signed_areas(nodes, elements):
    p = nodes[elements]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _topology(n_x, n_y):
    idx = np.arange(n_x * n_y).reshape(n_x, n_y)
    ll = idx[:-1, :-1].ravel()
    lr = idx[1:, :-1].ravel()
    ur = idx[1:, 1:].ravel()
    ul = idx[:-1, 1:].ravel()
    # each cell split along its lower-left -> upper-right diagonal
    elements = np.empty((2 * ll.size, 3), dtype=np.int64)
    elements[0::2] = np.column_stack([ll, lr, ur])
    elements[1::2] = np.column_stack([ll, ur, ul])
    right = idx[-1]
    neumann = np.column_stack([right[:-1], right[1:]])
    upper = np.column_stack([idx[:-1, -1], idx[1:, -1]])
    lower = np.column_stack([idx[:-1, 0], idx[1:, 0]])
    return elements, idx[0].copy(), neumann, upper, lower


def node_y(rho: ShapeParams, spec: GridSpec):
    """y-coordinates of all grid nodes as an ``(n_x, n_y)`` array."""
    return rho.ml[:, None] + rho.th[:, None] * spec.levels[None, :]


def build_grid(rho: ShapeParams, spec: GridSpec) -> Mesh:
    if rho.ml.shape != (spec.n_x,):
        raise ValueError(f"shape parameters have length {rho.ml.size}, grid has n_x={spec.n_x}")
    if np.any(rho.th <= 0):
        bad = int(np.argmin(rho.th))
        raise NonPositiveThickness(f"thickness {rho.th[bad]:.3e} at column {bad}")
    y = node_y(rho, spec)
    x = np.broadcast_to(spec.x_coords[:, None], y.shape)
    nodes = np.column_stack([x.ravel(), y.ravel()])
    elements, dirichlet, neumann, upper, lower = _topology(spec.n_x, spec.n_y)
    areas = signed_areas(nodes, elements)
    if np.any(areas <= 0):
        raise DegenerateCell(f"triangle {int(np.argmin(areas))} has area {areas.min():.3e}")
    return Mesh(nodes, elements, spec.n_x, spec.n_y, dirichlet, neumann, upper, lower)


def ml_th_to_ul(rho: ShapeParams):
    return rho.ml + 0.5 * rho.th, rho.ml - 0.5 * rho.th


def ul_to_ml_th(upper, lower) -> ShapeParams:
    upper = np.asarray(upper, dtype=float)
    lower = np.asarray(lower, dtype=float)
    if np.any(upper <= lower):
        raise NonPositiveThickness("upper boundary must lie strictly above the lower one")
    return ShapeParams(0.5 * (upper + lower), upper - lower)


def ul_matrix(n):
    """The (2n x 2n) matrix M with (upper, lower) = M (ml, th)."""
    eye = np.eye(n)
    return np.block([[eye, 0.5 * eye], [eye, -0.5 * eye]])


def ul_matrix_inverse(n):
    eye = np.eye(n)
    return np.block([[0.5 * eye, 0.5 * eye], [eye, -eye]])


def write_mesh(mesh: Mesh, fh):
    fh.write(f"nodes {mesh.n_nodes} elements {mesh.n_elements}\n")
    for k, (x, y) in enumerate(mesh.nodes):
        i, j = divmod(k, mesh.n_y)
        fh.write(f"{i} {j} {x:.17g} {y:.17g}\n")
    for a, b, c in mesh.elements:
        fh.write(f"{a} {b} {c}\n")


def read_mesh(fh):
    """Parse the text dump back into ``(nodes, elements)`` arrays."""
    header = fh.readline().split()
    if len(header) != 4 or header[0] != "nodes" or header[2] != "elements":
        raise ValueError(f"bad mesh header: {' '.join(header)}")
    n_nodes, n_elem = int(header[1]), int(header[3])
    nodes = np.empty((n_nodes, 2))
    for k in range(n_nodes):
        _, _, x, y = fh.readline().split()
        nodes[k] = float(x), float(y)
    elements = np.array([fh.readline().split() for _ in range(n_elem)], dtype=np.int64)
    return nodes, elements.reshape(n_elem, 3)
