"""Command line entry point: run sweeps, validate gradients, dump meshes."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from .bspline import BSplineBasis
from .config import RunConfig, load_config
from .errors import ConfigError
from .fem import BoundaryConditions, Material
from .geometry import write_mesh
from .gradients import fd_gradient
from .objectives import AngularRule
from .optim import IterationRecord, OptimConfig, history_point, pareto_filter, run_sweep
from .presets import get_preset
from .problem import ShapeProblem

log = logging.getLogger("ceramic_pareto")

HISTORY_FIELDS = [f.name for f in dataclasses.fields(IterationRecord)]


def _num(x):
    return repr(float(x))


def _tag(p):
    return f"{p:g}"


def preset_of(cfg: RunConfig):
    return get_preset(cfg.preset, start_bump_amplitude=cfg.bump_amplitude,
                      right_offset=cfg.right_offset, c1_scale=cfg.c1_scale)


def build_problem(cfg: RunConfig):
    """Problem, start coefficients and optimizer settings described by ``cfg``."""
    preset = preset_of(cfg)
    spec = preset.grid(cfg.n_x, cfg.n_y)
    basis = BSplineBasis.clamped_uniform(cfg.n_B, 0.0, preset.length, degree=cfg.degree)
    try:
        mat = Material(E=cfg.E, nu=cfg.nu, m=cfg.m, sigma0=cfg.sigma0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    bc = BoundaryConditions(body_force=tuple(cfg.ftilde), traction=tuple(cfg.gtilde))
    fixed = ShapeProblem.end_coefficients(cfg.n_B) if cfg.fix_ends else ()
    problem = ShapeProblem(spec, basis, mat, bc, AngularRule(cfg.n_phi), gradient_mode=cfg.gradient_mode,
                           fd_eps=cfg.fd_eps, fixed=fixed, solver_tol=cfg.solver_tol)
    optim = OptimConfig(beta=cfg.beta, eps=cfg.eps, max_iter=cfg.max_iter, max_armijo=cfg.max_armijo,
                        delta_factor=cfg.delta_factor, xi=cfg.xi, weights=tuple(cfg.omegas),
                        scalings=tuple(cfg.omega_bars), c1=cfg.c1, c2=cfg.c2, c1_scale=preset.c1_scale)
    return problem, preset.start_gamma(spec, basis), optim


def gamma_names(n_B):
    return [f"ml{i}" for i in range(n_B)] + [f"th{i}" for i in range(n_B)]


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _summary_row(h, point):
    gamma = h.final_gamma if h.final_gamma is not None else np.full(0, np.nan)
    return [h.method, _tag(h.param), _num(point.f1), _num(point.f2), h.iterations, h.status,
            *(_num(g) for g in gamma)]


def run_case_study(cfg: RunConfig, output_dir=None):
    """Run the configured sweep and write runs.csv, front.csv, histories and meshes.

    Returns the list of run histories.
    """
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    problem, gamma0, optim = build_problem(cfg)
    start = problem.evaluate(gamma0)
    with open(out / "start.mesh", "w") as fh:
        write_mesh(start.mesh, fh)

    hists = run_sweep(problem, gamma0, optim, mode=cfg.mode, workers=cfg.workers)
    header = ["method", "param", "f1", "f2", "iterations", "status"] + gamma_names(cfg.n_B)
    rows, points = [], []
    for h in hists:
        if h.final is None:
            rows.append([h.method, _tag(h.param), "nan", "nan", 0, h.status])
            continue
        p = history_point(h)
        points.append((p, h))
        rows.append(_summary_row(h, p))
        _write_rows(out / f"history_{h.method}_{_tag(h.param)}.csv", HISTORY_FIELDS,
                    [[_fmt_field(getattr(r, f)) for f in HISTORY_FIELDS] for r in h.records])
        with open(out / f"final_{h.method}_{_tag(h.param)}.mesh", "w") as fh:
            write_mesh(problem.evaluate(h.final_gamma).mesh, fh)
    _write_rows(out / "runs.csv", header, rows)

    by_id = {id(p): h for p, h in points}
    front = pareto_filter([p for p, _ in points])
    _write_rows(out / "front.csv", header, [_summary_row(by_id[id(p)], p) for p in front])
    return hists


def _fmt_field(v):
    return _num(v) if isinstance(v, float) else str(v)


def export_validation(cfg: RunConfig, output_dir=None):
    """Adjoint versus central-difference deviations for every coefficient and eps.

    Writes ``gradient_validation.csv`` with one row per eps and one column
    per (objective, coefficient) pair; returns the table as an array.
    """
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    problem, gamma0, _ = build_problem(dataclasses.replace(cfg, gradient_mode="adjoint"))
    ev = problem.evaluate(gamma0)
    g1, g2 = problem.gradients(ev, project=False)
    names = gamma_names(cfg.n_B)
    header = ["eps"] + [f"f1:{n}" for n in names] + [f"f2:{n}" for n in names]
    table = []
    for eps in cfg.validation_eps:
        fd = fd_gradient(lambda g: problem.evaluate(g).f, gamma0, eps)
        table.append([eps, *np.abs(g1 - fd[:, 0]), *np.abs(g2 - fd[:, 1])])
    _write_rows(out / "gradient_validation.csv", header, [[_num(v) for v in row] for row in table])
    return np.array(table)


def dump_mesh(cfg: RunConfig, output_dir=None, dump_stress=False):
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    problem, gamma0, _ = build_problem(cfg)
    ev = problem.evaluate(gamma0)
    with open(out / f"{cfg.preset}.mesh", "w") as fh:
        write_mesh(ev.mesh, fh)
    if dump_stress:
        s = ev.state.element_stress
        _write_rows(out / f"{cfg.preset}_stress.csv", ["element", "s11", "s12", "s22"],
                    [[e, _num(s[e, 0, 0]), _num(s[e, 0, 1]), _num(s[e, 1, 1])] for e in range(len(s))])
    return ev


def make_parser():
    p = argparse.ArgumentParser(prog="ceramic-pareto", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run the configured Pareto sweep"),
                        ("validate-gradients", "compare adjoint gradients with finite differences")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True)
        s.add_argument("--output-dir")
    s = sub.add_parser("dump-mesh", help="write the starting mesh of a preset")
    s.add_argument("--preset", required=True)
    s.add_argument("--config")
    s.add_argument("--output-dir")
    s.add_argument("--dump-stress", action="store_true")
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "dump-mesh":
            cfg = load_config(args.config) if args.config else RunConfig()
            cfg = dataclasses.replace(cfg, preset=args.preset)
        else:
            cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "run":
            hists = run_case_study(cfg, args.output_dir)
            n_conv = sum(h.converged for h in hists)
            print(f"{len(hists)} runs, {n_conv} converged")
        elif args.command == "validate-gradients":
            table = export_validation(cfg, args.output_dir)
            print(f"max deviation at eps={table[-1, 0]:g}: {table[-1, 1:].max():.3e}")
        else:
            dump_mesh(cfg, args.output_dir, args.dump_stress)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
