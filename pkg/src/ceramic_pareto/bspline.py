"""Clamped B-spline representation of meanline and thickness curves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveThickness, OutOfDomain, RankDeficient
from .geometry import TH_MIN, ShapeParams


@dataclass(frozen=True)
class BSplineBasis:
    n_B: int
    degree: int
    knots: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        if knots.size != self.n_B + self.degree + 1:
            raise ValueError("knot vector length must be n_B + degree + 1")
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be non-decreasing")
        object.__setattr__(self, "knots", knots)

    @classmethod
    def clamped_uniform(cls, n_B, x_min, x_max, degree=3):
        if n_B < degree + 1:
            raise ValueError(f"a degree-{degree} basis needs at least {degree + 1} functions")
        inner = np.linspace(x_min, x_max, n_B - degree + 1)[1:-1]
        knots = np.concatenate([[x_min] * (degree + 1), inner, [x_max] * (degree + 1)])
        return cls(n_B, degree, knots)

    @property
    def domain(self):
        return self.knots[self.degree], self.knots[-self.degree - 1]

    def __call__(self, x):
        return basis_matrix(self, x)


@dataclass(frozen=True)
class BSplineCoeffs:
    ml: np.ndarray
    th: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ml", np.asarray(self.ml, dtype=float))
        object.__setattr__(self, "th", np.asarray(self.th, dtype=float))

    def as_vector(self):
        return np.concatenate([self.ml, self.th])

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        half = v.size // 2
        return cls(v[:half].copy(), v[half:].copy())


def basis_matrix(basis: BSplineBasis, x_coords) -> np.ndarray:
    """Evaluate every basis function at every x by the Cox-de Boor recursion.

    Returns an ``(len(x), n_B)`` matrix. The right end of the domain is
    assigned to the last non-empty knot span so that the clamped basis
    interpolates there as well.
    """
    x = np.atleast_1d(np.asarray(x_coords, dtype=float))
    t = basis.knots
    p = basis.degree
    lo, hi = basis.domain
    tol = 1e-12 * max(1.0, abs(hi - lo))
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        raise OutOfDomain(f"x outside knot domain [{lo}, {hi}]")
    x = np.clip(x, lo, hi)

    n_spans = t.size - 1
    N = np.zeros((x.size, n_spans))
    for k in range(n_spans):
        if t[k] < t[k + 1]:
            N[:, k] = (x >= t[k]) & (x < t[k + 1])
    last = np.flatnonzero(t[:-1] < t[1:])[-1]
    N[x >= hi, :] = 0.0
    N[x >= hi, last] = 1.0

    for q in range(1, p + 1):
        nxt = np.zeros((x.size, n_spans - q))
        for k in range(n_spans - q):
            den_l = t[k + q] - t[k]
            den_r = t[k + q + 1] - t[k + 1]
            if den_l > 0:
                nxt[:, k] += (x - t[k]) / den_l * N[:, k]
            if den_r > 0:
                nxt[:, k] += (t[k + q + 1] - x) / den_r * N[:, k + 1]
        N = nxt
    return N


def gamma_to_rho(gamma: BSplineCoeffs, basis: BSplineBasis, x_coords, th_min=TH_MIN) -> ShapeParams:
    B = basis_matrix(basis, x_coords)
    th = B @ gamma.th
    if np.any(th <= th_min):
        bad = int(np.argmin(th))
        raise NonPositiveThickness(f"thickness {th[bad]:.3e} at grid column {bad} (min {th_min:g})")
    return ShapeParams(B @ gamma.ml, th)


def rho_jacobian(basis: BSplineBasis, x_coords) -> np.ndarray:
    """d(ml, th)/d(gamma_ml, gamma_th): two copies of the basis matrix on the diagonal."""
    B = basis_matrix(basis, x_coords)
    Z = np.zeros_like(B)
    return np.block([[B, Z], [Z, B]])


def fit_gamma(rho: ShapeParams, basis: BSplineBasis, x_coords, interpolate_ends=False) -> BSplineCoeffs:
    """Least-squares coefficients reproducing ``rho`` on the grid.

    With ``interpolate_ends`` the first and last coefficients are pinned to
    the end values of ``rho`` (a clamped spline interpolates its end
    coefficients) and only the interior ones are fitted.
    """
    B = basis_matrix(basis, x_coords)
    if interpolate_ends:
        inner = B[:, 1:-1]
        if np.linalg.matrix_rank(inner) < inner.shape[1]:
            raise RankDeficient("interior basis columns are linearly dependent on the grid")
        out = []
        for r in (rho.ml, rho.th):
            g = np.empty(basis.n_B)
            g[0], g[-1] = r[0], r[-1]
            rhs = r - B[:, 0] * g[0] - B[:, -1] * g[-1]
            g[1:-1] = np.linalg.lstsq(inner, rhs, rcond=None)[0]
            out.append(g)
        return BSplineCoeffs(*out)
    if np.linalg.matrix_rank(B) < B.shape[1]:
        raise RankDeficient("basis matrix does not have full column rank on the grid")
    sol = np.linalg.lstsq(B, np.column_stack([rho.ml, rho.th]), rcond=None)[0]
    return BSplineCoeffs(sol[:, 0], sol[:, 1])
