"""Weighted-sum and biobjective steepest-descent drivers for Pareto fronts."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AllRatiosUndefined, ShapeError, StepFailure

log = logging.getLogger(__name__)

CONVERGED = "Converged"
MAX_ITER = "MaxIter"
STEP_FAILURE = "StepFailure"
ERROR = "Error"

DEFAULT_WEIGHTS = tuple(round(0.2 + 0.05 * k, 2) for k in range(15))
DEFAULT_SCALINGS = tuple(round(0.5 + 0.1 * k, 1) for k in range(16))


@dataclass
class OptimConfig:
    beta: float = 1e-4
    eps: float = 1e-4
    max_iter: int = 150
    max_armijo: int = 30
    delta_factor: float = 0.8
    xi: float = 1e-4
    weights: tuple = DEFAULT_WEIGHTS
    scalings: tuple = DEFAULT_SCALINGS
    c1: float | None = None  # None: c1_scale / f1 at the start shape
    c2: float | None = None  # None: 1 / f2 at the start shape
    c1_scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not 0 < self.delta_factor <= 1:
            raise ValueError("delta_factor must lie in (0, 1]")
        if self.xi < 0:
            raise ValueError("xi must be non-negative")
        if any(not 0 < w < 1 for w in self.weights):
            raise ValueError("weights must lie in (0, 1)")
        if any(not s > 0 for s in self.scalings):
            raise ValueError("scalings must be positive")
        for c in (self.c1, self.c2):
            if c is not None and not c > 0:
                raise ValueError("scaling factors c1, c2 must be positive")
        if not self.c1_scale > 0:
            raise ValueError("c1_scale must be positive")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    f1: float
    f2: float
    step: float
    dir_norm: float
    armijo_halvings: int
    d_max: float = 0.0  # max |d_i| after clamping
    d_ml_max: float = 0.0  # same, meanline block only
    ml_shift: float = 0.0  # max_i |change of the meanline| caused by the step


@dataclass
class RunHistory:
    method: str
    param: float
    records: list = field(default_factory=list)
    final_gamma: np.ndarray | None = None
    status: str = MAX_ITER
    delta_max: float = np.inf
    scaling: float = 1.0
    degenerate_scaling: bool = False
    message: str = ""

    @property
    def iterations(self):
        """Number of accepted steps."""
        return max(len(self.records) - 1, 0)

    @property
    def final(self):
        return self.records[-1] if self.records else None

    @property
    def converged(self):
        return self.status == CONVERGED


@dataclass(frozen=True)
class ParetoPoint:
    f1: float
    f2: float
    gamma: np.ndarray | None = None
    method: str = ""
    param: float = float("nan")
    converged: bool = False


def qp_weight(g1, g2):
    """Dual weight ``lam`` minimising ``|lam g1 + (1 - lam) g2|^2`` over [0, 1]."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    diff = g1 - g2
    den = diff @ diff
    return 0.5 if den == 0 else min(max(-(diff @ g2) / den, 0.0), 1.0)


def steepest_direction_qp(g1, g2):
    """Solve ``min rho + |d|^2/2  s.t.  g_j^T d <= rho`` for two gradients.

    The dual is a one-dimensional quadratic in the convex weight of the two
    gradients, minimised in closed form and clamped to [0, 1].
    """
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    lam = qp_weight(g1, g2)
    d = -(lam * g1 + (1.0 - lam) * g2)
    rho = max(g1 @ d, g2 @ d) if np.any(d) else 0.0
    # cancellation can leave a round-off sized d that is not a descent direction
    if not rho < 0:
        return np.zeros_like(d), 0.0
    return d, rho


def clamp_direction(d, th_first, n_y, delta_factor=0.8):
    return clamp_to(d, delta_factor * th_first / n_y)


def clamp_to(d, delta_max):
    d = np.asarray(d, dtype=float)
    m = np.max(np.abs(d)) if d.size else 0.0
    if m > delta_max:
        return d * (delta_max / m)
    return d.copy()


def scaling_parameter(g1, g2, omega_bar):
    g1 = np.abs(np.asarray(g1, dtype=float))
    g2 = np.abs(np.asarray(g2, dtype=float))
    ok = g2 > 1e-14
    if not np.any(ok):
        raise AllRatiosUndefined("every volume-gradient component vanishes")
    return omega_bar * float(np.max(g1[ok] / g2[ok]))


def armijo(evaluate, values, gamma, f_current, slopes, d, beta, max_armijo):
    """Backtrack ``t = 1, 1/2, 1/4, ...`` until every objective decreases sufficiently.

    ``values(ev)`` maps an evaluation to the objective vector compared
    against ``f_current + beta t slopes``; infeasible trial points count as
    failed checks. Returns ``(t, evaluation, halvings)``.
    """
    f_current = np.atleast_1d(np.asarray(f_current, dtype=float))
    slopes = np.atleast_1d(np.asarray(slopes, dtype=float))
    t = 1.0
    for ell in range(max_armijo + 1):
        try:
            ev = evaluate(gamma + t * d)
        except ShapeError as exc:
            log.debug("trial step t=%g infeasible: %s", t, exc)
        else:
            f = np.atleast_1d(values(ev))
            if np.all(f <= f_current + beta * t * slopes) and np.all(np.isfinite(f)):
                return t, ev, ell
        t *= 0.5
    raise StepFailure(f"no acceptable step after {max_armijo} halvings")


def armijo_biobjective(evaluate, gamma, f_current, g1, g2, d, beta, max_armijo):
    """Biobjective Armijo rule; additionally demands strict decrease of both objectives."""
    f_current = np.asarray(f_current, dtype=float)

    def values(ev):
        f = ev.f
        # strictness survives even when beta*t*slope is below the rounding of f
        return np.where(f < f_current, f, np.inf)

    return armijo(evaluate, values, gamma, f_current, [g1 @ d, g2 @ d], d, beta, max_armijo)


def _record(k, ev, t, d, n_half, shift):
    half = d.size // 2
    return IterationRecord(
        k, ev.f1, ev.f2, t, float(np.linalg.norm(d)), n_half,
        float(np.max(np.abs(d))) if d.size else 0.0,
        float(np.max(np.abs(d[:half]))) if half else 0.0,
        shift,
    )


def _final_record(k, ev):
    return IterationRecord(k, ev.f1, ev.f2, 0.0, 0.0, 0)


def _descent_loop(problem, ev, hist, cfg, direction, evaluate_step):
    """Shared iteration skeleton; stops on ``|t d| <= eps`` or ``max_iter``."""
    k = 0
    last = np.inf
    while last > cfg.eps and k < cfg.max_iter:
        d = direction(ev)
        if not np.any(d):
            hist.status = CONVERGED
            break
        try:
            t, ev_new, n_half = evaluate_step(ev, d)
        except StepFailure as exc:
            hist.status = STEP_FAILURE
            hist.message = str(exc)
            break
        hist.records.append(_record(k, ev, t, d, n_half, problem.ml_shift(ev, ev_new)))
        last = t * float(np.linalg.norm(d))
        ev = ev_new
        k += 1
    else:
        hist.status = CONVERGED if last <= cfg.eps else MAX_ITER
    hist.records.append(_final_record(k, ev))
    hist.final_gamma = ev.gamma
    return hist


def run_weighted_sum(problem, gamma0, omega, cfg: OptimConfig = OptimConfig()) -> RunHistory:
    """Gradient descent with Armijo steps on ``omega c1 f1 + (1 - omega) c2 f2``.

    The blend is divided by its value at ``gamma0`` so that scaling c1 and
    c2 by a common factor does not change the iterates.
    """
    if not 0 < omega < 1:
        raise ValueError("omega must lie in (0, 1)")
    ev = problem.evaluate(gamma0)
    c1 = cfg.c1 if cfg.c1 is not None else cfg.c1_scale / ev.f1
    c2 = cfg.c2 if cfg.c2 is not None else 1.0 / ev.f2
    a1, a2 = omega * c1, (1.0 - omega) * c2
    norm = a1 * ev.f1 + a2 * ev.f2
    w1, w2 = a1 / norm, a2 / norm
    hist = RunHistory("wsm", omega, delta_max=problem.step_bound(ev, cfg.delta_factor))
    grads = {}

    def blend(e):
        return np.array([w1 * e.f1 + w2 * e.f2])

    def direction(e):
        g1, g2 = problem.gradients(e, cfg.xi)
        grads["g"] = w1 * g1 + w2 * g2
        return clamp_to(-grads["g"], hist.delta_max)

    def step(e, d):
        return armijo(problem.evaluate, blend, e.gamma, blend(e), grads["g"] @ d, d,
                      cfg.beta, cfg.max_armijo)

    return _descent_loop(problem, ev, hist, cfg, direction, step)


def run_biobjective_descent(problem, gamma0, omega_bar, cfg: OptimConfig = OptimConfig()) -> RunHistory:
    """Common-descent steps from the two-gradient QP, volume scaled by ``s``.

    ``s = omega_bar * r_max`` is fixed from the gradients at ``gamma0``.
    """
    ev = problem.evaluate(gamma0)
    hist = RunHistory("moda", omega_bar, delta_max=problem.step_bound(ev, cfg.delta_factor))
    g1, g2 = problem.gradients(ev, cfg.xi)
    s = scaling_parameter(g1, g2, omega_bar)
    hist.scaling = s
    if not s > 0:
        hist.degenerate_scaling = True
        log.warning("start shape is critical for f1; scaling parameter is zero")
    cache = {"at": ev, "g": (g1, g2)}

    def direction(e):
        if cache["at"] is not e:
            cache["at"], cache["g"] = e, problem.gradients(e, cfg.xi)
        a, b = cache["g"]
        d, rho = steepest_direction_qp(a, s * b)
        if rho >= 0:
            return np.zeros_like(d)
        return clamp_to(d, hist.delta_max)

    def step(e, d):
        # the sufficient-decrease test on s*f2 is equivalent to the one on f2
        a, b = cache["g"]
        return armijo_biobjective(problem.evaluate, e.gamma, e.f, a, b, d,
                                  cfg.beta, cfg.max_armijo)

    return _descent_loop(problem, ev, hist, cfg, direction, step)


def pareto_filter(points):
    """Nondominated subset, sorted by f1; the first of equal outcome vectors survives."""
    pts = [p for p in points if np.isfinite(p.f1) and np.isfinite(p.f2)]
    order = sorted(range(len(pts)), key=lambda i: (pts[i].f1, pts[i].f2))
    out = []
    best = np.inf
    for i in order:
        if pts[i].f2 < best:
            out.append(pts[i])
            best = pts[i].f2
    return out


def history_point(hist: RunHistory):
    last = hist.final
    return ParetoPoint(last.f1, last.f2, hist.final_gamma, hist.method, hist.param, hist.converged)


def run_sweep(problem, gamma0, cfg: OptimConfig, mode="both", workers=1):
    """Run every configured weight and/or scaling; results in deterministic order."""
    jobs = []
    if mode in ("wsm", "both"):
        jobs += [(run_weighted_sum, w) for w in cfg.weights]
    if mode in ("moda", "both"):
        jobs += [(run_biobjective_descent, s) for s in cfg.scalings]
    if not jobs:
        raise ValueError(f"unknown mode {mode!r}")

    def one(job):
        fn, p = job
        try:
            return fn(problem, gamma0, p, cfg)
        except ShapeError as exc:
            log.error("%s run with parameter %g failed: %s", fn.__name__, p, exc)
            method = "wsm" if fn is run_weighted_sum else "moda"
            return RunHistory(method, p, status=ERROR, message=str(exc))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, jobs))
    return [one(j) for j in jobs]
