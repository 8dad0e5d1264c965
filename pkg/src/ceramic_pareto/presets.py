"""Case-study presets: starting geometries of the straight and the S-shaped joint."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bspline import BSplineBasis, fit_gamma
from .geometry import GridSpec, ShapeParams


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


@dataclass(frozen=True)
class CaseStudyPreset:
    """Joint of fixed length and end height with a bent starting meanline.

    The start meanline is ``right_offset * smoothstep(x / L) + bump * sin(pi x / L)``;
    the thickness is constant. ``c1_scale`` calibrates the weighted-sum
    normalization of the intensity measure (see :class:`OptimConfig`).
    """

    name: str
    length: float = 1.0
    end_height: float = 0.2
    right_offset: float = 0.0
    start_bump_amplitude: float = 0.15
    c1_scale: float = 1.0

    def __post_init__(self):
        if not self.length > 0 or not self.end_height > 0:
            raise ValueError("length and end height must be positive")

    def meanline(self, x):
        t = np.asarray(x, dtype=float) / self.length
        return self.right_offset * smoothstep(t) + self.start_bump_amplitude * np.sin(np.pi * t)

    def grid(self, n_x, n_y):
        return GridSpec.uniform(n_x, n_y, length=self.length)

    def start_rho(self, spec: GridSpec):
        x = spec.x_coords
        return ShapeParams(self.meanline(x), np.full(x.size, self.end_height))

    def start_gamma(self, spec: GridSpec, basis: BSplineBasis):
        """Coefficients of the start shape, exact at both ends."""
        return fit_gamma(self.start_rho(spec), basis, spec.x_coords, interpolate_ends=True).as_vector()


# the weighted-sum scale for the straight joint compensates the large f1
# of the bent start relative to the near-straight optima
PRESETS = {
    "straight_joint": CaseStudyPreset("straight_joint", right_offset=0.0,
                                      start_bump_amplitude=0.15, c1_scale=20.0),
    "s_joint": CaseStudyPreset("s_joint", right_offset=-0.27, start_bump_amplitude=0.0),
}


def get_preset(name, **overrides):
    try:
        base = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    fields = {k: v for k, v in overrides.items() if v is not None}
    return base if not fields else CaseStudyPreset(**{**base.__dict__, **fields})
