"""Flat ``key = value`` run configuration."""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, ValidationError
from .optim import DEFAULT_SCALINGS, DEFAULT_WEIGHTS
from .presets import PRESETS

log = logging.getLogger(__name__)

MODES = ("wsm", "moda", "both")
GRADIENT_MODES = ("adjoint", "fd")


@dataclass
class RunConfig:
    preset: str = "straight_joint"
    n_x: int = 41
    n_y: int = 7
    n_B: int = 5
    degree: int = 3
    E: float = 320e9
    nu: float = 0.25
    m: float = 5.0
    sigma0: float = 2.4e7
    gtilde: tuple = (1e7, 0.0)
    ftilde: tuple = (0.0, 0.0)
    xi: float = 1e-4
    beta: float = 1e-4
    eps: float = 1e-4
    max_iter: int = 150
    max_armijo: int = 30
    delta_factor: float = 0.8
    n_phi: int = 256
    mode: str = "both"
    omegas: tuple = DEFAULT_WEIGHTS
    omega_bars: tuple = DEFAULT_SCALINGS
    gradient_mode: str = "adjoint"
    output_dir: str = "output"
    c1: float | None = None
    c2: float | None = None
    c1_scale: float | None = None  # None: the preset's value
    bump_amplitude: float | None = None
    right_offset: float | None = None
    fix_ends: bool = True
    workers: int = 1
    solver_tol: float = 1e-10
    fd_eps: float = 1e-6
    validation_eps: tuple = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7)

    def __post_init__(self):
        validate(self)

    def to_text(self):
        return "".join(f"{f.name} = {_format(getattr(self, f.name))}\n" for f in dataclasses.fields(self))


_KINDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_OPTIONAL = {"c1", "c2", "c1_scale", "bump_amplitude", "right_offset"}
_TUPLES = {"gtilde", "ftilde", "omegas", "omega_bars", "validation_eps"}
_INTS = {"n_x", "n_y", "n_B", "degree", "max_iter", "max_armijo", "n_phi", "workers"}
_STRS = {"preset", "mode", "gradient_mode", "output_dir"}


def _format(v):
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _number(key, text, kind):
    try:
        v = kind(text)
    except ValueError:
        raise ValidationError(key, f"cannot read {text!r} as {kind.__name__}") from None
    if kind is float and not math.isfinite(v):
        raise ValidationError(key, "must be finite")
    return v


def _convert(key, text):
    if key in _STRS:
        return text
    if key in _OPTIONAL and text.lower() in ("auto", "none", ""):
        return None
    if key == "fix_ends":
        low = text.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValidationError(key, f"expected a boolean, got {text!r}")
    if key in _TUPLES:
        parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
        if not parts:
            raise ValidationError(key, "empty list")
        return tuple(_number(key, p.strip(), float) for p in parts)
    if key in _INTS:
        return _number(key, text, int)
    return _number(key, text, float)


def validate(cfg: RunConfig):
    if cfg.preset not in PRESETS:
        raise ValidationError("preset", f"unknown preset {cfg.preset!r}")
    if cfg.mode not in MODES:
        raise ValidationError("mode", f"must be one of {MODES}")
    if cfg.gradient_mode not in GRADIENT_MODES:
        raise ValidationError("gradient_mode", f"must be one of {GRADIENT_MODES}")
    if cfg.n_x < 2 or cfg.n_y < 2:
        raise ValidationError("n_x" if cfg.n_x < 2 else "n_y", "need at least two grid lines")
    if cfg.degree < 0 or cfg.n_B < cfg.degree + 1:
        raise ValidationError("n_B", "need at least degree + 1 basis functions")
    for key in ("E", "sigma0", "eps", "solver_tol", "fd_eps"):
        if not getattr(cfg, key) > 0:
            raise ValidationError(key, "must be positive")
    if not -1.0 < cfg.nu < 0.5:
        raise ValidationError("nu", "must lie in (-1, 0.5)")
    if not cfg.m >= 1:
        raise ValidationError("m", "must be at least 1")
    if not 0 < cfg.beta < 1:
        raise ValidationError("beta", "must lie in (0, 1)")
    if not 0 < cfg.delta_factor <= 1:
        raise ValidationError("delta_factor", "must lie in (0, 1]")
    if cfg.xi < 0:
        raise ValidationError("xi", "must be non-negative")
    if cfg.max_iter < 1 or cfg.max_armijo < 0 or cfg.workers < 1:
        raise ValidationError("max_iter", "iteration counts must be positive")
    if cfg.n_phi < 4 or cfg.n_phi % 2:
        raise ValidationError("n_phi", "must be even and at least 4")
    if any(not 0 < w < 1 for w in cfg.omegas):
        raise ValidationError("omegas", "weights must lie in (0, 1)")
    if any(not s > 0 for s in cfg.omega_bars):
        raise ValidationError("omega_bars", "scalings must be positive")
    if any(not e > 0 for e in cfg.validation_eps):
        raise ValidationError("validation_eps", "must be positive")
    for key in ("gtilde", "ftilde"):
        if len(getattr(cfg, key)) not in (1, 2):
            raise ValidationError(key, "expected one or two components")
    for key in ("c1", "c2", "c1_scale"):
        v = getattr(cfg, key)
        if v is not None and not v > 0:
            raise ValidationError(key, "must be positive")


def parse_config(text, source="<string>"):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KINDS:
            raise ValidationError(key, f"unknown key (line {lineno})")
        if key in values:
            raise ValidationError(key, f"given twice (line {lineno})")
        values[key] = _convert(key, value)
    for key in ("gtilde", "ftilde"):
        if key in values and len(values[key]) == 1:
            values[key] = (values[key][0], 0.0)
    if "sigma0" not in values:
        log.warning("sigma0 not set; using the default %g Pa", RunConfig.sigma0)
    return RunConfig(**values)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))


def write_config(cfg: RunConfig, path):
    Path(path).write_text(cfg.to_text())


def default_config(**overrides):
    return dataclasses.replace(RunConfig(), **overrides)


__all__ = ["RunConfig", "parse_config", "load_config", "write_config", "default_config"]
