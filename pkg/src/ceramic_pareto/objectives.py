"""The two objectives: Weibull-type intensity measure and material volume."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonIntegerM
from .fem import Material, StateSolution
from .geometry import Mesh


@dataclass(frozen=True)
class ObjectivePair:
    f1: float
    f2: float

    def as_array(self):
        return np.array([self.f1, self.f2])


@dataclass(frozen=True)
class AngularRule:
    """Uniform midpoint rule on the unit circle."""

    n_phi: int = 256

    def __post_init__(self):
        if self.n_phi < 4 or self.n_phi % 2:
            raise ValueError("n_phi must be an even integer >= 4")

    @cached_property
    def angles(self):
        return 2 * np.pi * (np.arange(1, self.n_phi + 1) - 0.5) / self.n_phi

    @cached_property
    def directions(self):
        return np.column_stack([np.cos(self.angles), np.sin(self.angles)])

    @cached_property
    def projector(self):
        """Rows (c^2, 2cs, s^2) so that ``[s11, s12, s22] @ projector`` gives n^T sigma n."""
        c, s = self.directions[:, 0], self.directions[:, 1]
        return np.vstack([c * c, 2.0 * c * s, s * s])


def sigma_n(sigma, n):
    """Positive part of the normal stress ``n^T sigma n``."""
    n = np.asarray(n, dtype=float)
    return max(float(n @ np.asarray(sigma, dtype=float) @ n), 0.0)


def _normal_stress(sig, rule: AngularRule):
    """``n_k^T sigma_e n_k`` for every element e and direction k."""
    voigt = np.column_stack([sig[:, 0, 0], sig[:, 0, 1], sig[:, 1, 1]])
    return voigt @ rule.projector


def _power(x, p):
    """``x**p`` for x >= 0; integer exponents by repeated squaring (much faster than pow)."""
    if float(p) != int(p) or p < 1:
        return x**p
    p = int(p)
    out = None
    base = x
    while p:
        if p & 1:
            out = base if out is None else out * base
        p >>= 1
        if p:
            base = base * base
    return out


def stress_hazard(sig, mat: Material, rule: AngularRule, derivative=False):
    """Angular mean of ``(sigma_n / sigma0)^m`` per element.

    With ``derivative`` also returns its derivative with respect to the
    (symmetric) stress tensor, shape ``(n_elem, 2, 2)``.
    """
    sn = np.maximum(_normal_stress(sig, rule), 0.0) / mat.sigma0
    if not derivative:
        return np.mean(_power(sn, mat.m), axis=1)
    low = _power(sn, mat.m - 1) if mat.m > 1 else np.ones_like(sn)
    h = np.mean(low * sn, axis=1)
    w = mat.m * low / (mat.sigma0 * rule.n_phi)
    nn = np.einsum("ki,kj->kij", rule.directions, rule.directions)
    return h, (w @ nn.reshape(-1, 4)).reshape(-1, 2, 2)


def intensity_measure(state: StateSolution, mat: Material, rule: AngularRule = AngularRule()):
    # prefactor 1/(2 pi) times the angular weight 2 pi / n_phi leaves a plain mean
    h = stress_hazard(state.element_stress, mat, rule)
    return float(np.dot(state.element_area, h))


def circle_power_mean(m):
    """(1/2pi) * integral of cos^(2m) over a full period, i.e. (2m-1)!!/(2m)!!."""
    out = 1.0
    for k in range(1, m + 1):
        out *= (2 * k - 1) / (2 * k)
    return out


def analytic_rod_intensity(s, mat: Material, area):
    """Closed-form intensity measure of a uniformly stressed uniaxial bar."""
    if float(mat.m) != int(mat.m):
        raise NonIntegerM(f"oracle needs an integer Weibull module, got {mat.m}")
    if s < 0:
        raise ValueError("tensile stress must be non-negative")
    m = int(mat.m)
    return area * (s / mat.sigma0) ** m * circle_power_mean(m)


def volume(mesh: Mesh):
    return float(np.sum(mesh.element_areas()))
