"""Curvature-weighted gradient transformation on the upper/lower boundaries."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFacet
from .geometry import GridSpec, ShapeParams, ml_th_to_ul


@dataclass(frozen=True)
class CurvatureField:
    kappa_upper: np.ndarray
    kappa_lower: np.ndarray
    xi: float

    def weights(self):
        """Diagonal of the scaling matrix, upper entries first."""
        k = np.concatenate([self.kappa_upper, self.kappa_lower])
        return 1.0 / (1.0 + self.xi * k**2)


def discrete_curvature(points):
    """Normal-jump curvature estimate at every vertex of an open polyline.

    Interior vertices use the two adjacent facets; the end vertices copy
    their neighbour's value.
    """
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[0] < 3:
        raise ValueError("need at least three points")
    t = np.diff(p, axis=0)
    length = np.linalg.norm(t, axis=1)
    if np.any(length < 1e-14):
        raise DegenerateFacet(f"facet {int(np.argmin(length))} has length {length.min():.2e}")
    normals = np.column_stack([-t[:, 1], t[:, 0]]) / length[:, None]
    kappa = np.empty(p.shape[0])
    kappa[1:-1] = 2.0 * np.linalg.norm(normals[:-1] - normals[1:], axis=1) / (length[:-1] + length[1:])
    kappa[0] = kappa[1]
    kappa[-1] = kappa[-2]
    return kappa


def curvature_field(rho: ShapeParams, spec: GridSpec, xi):
    upper, lower = ml_th_to_ul(rho)
    x = spec.x_coords
    return CurvatureField(
        discrete_curvature(np.column_stack([x, upper])),
        discrete_curvature(np.column_stack([x, lower])),
        xi,
    )


def curvature_adapt(grad_rho, rho: ShapeParams, spec: GridSpec, xi):
    """Apply ``M^-1 D M`` to a (meanline, thickness) gradient.

    ``M`` maps (ml, th) to (upper, lower); ``D`` damps every boundary entry
    by ``1 / (1 + xi kappa^2)``.
    """
    grad_rho = np.asarray(grad_rho, dtype=float)
    if xi < 0:
        raise ValueError("xi must be non-negative")
    if xi == 0:
        return grad_rho.copy()
    w = curvature_field(rho, spec, xi).weights()
    if np.all(w == 1.0):
        return grad_rho.copy()
    n = spec.n_x
    ml, th = grad_rho[:n], grad_rho[n:]
    up = w[:n] * (ml + 0.5 * th)
    lo = w[n:] * (ml - 0.5 * th)
    return np.concatenate([0.5 * (up + lo), up - lo])
