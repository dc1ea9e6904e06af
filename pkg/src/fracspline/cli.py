"""Batch front end: solve runs, convergence sweeps, basis and E_{g,b} tables as CSV.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .analysis import linf_error, pair_orders
from .bspline import BasisIndex, basis_eval
from .caputo import caputo_basis
from .config import RunConfig, dump_config, parse_config_file
from .errors import ConfigError, NumericsError
from .mittag_leffler import DEFAULT_Z_MAX, MLParams, ml_scalar, reference_solution
from .solver import CollocationConfig, collocation_grid, sample_solution, solve

__all__ = ["main"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(row) + "\n")


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _reference_for(cfg: RunConfig, problem):
    """Exact-solution evaluator: explicit reference terms, else Mittag-Leffler."""
    explicit = cfg.reference_evaluator()
    if explicit is not None:
        return explicit
    if problem.forcing is None:
        return lambda t: reference_solution(problem, t)
    return None


def _cmd_solve(args) -> int:
    cfg = parse_config_file(args.config)
    if args.dump_config:
        sys.stdout.write(dump_config(cfg))
        return 0
    problem = cfg.problem()
    coll = cfg.collocation()
    sol = solve(problem, coll)
    grid_level = args.grid_level if args.grid_level is not None else cfg.effective_grid_level()
    grid = collocation_grid(grid_level, cfg.T)
    approx = sample_solution(sol, grid)
    reference = _reference_for(cfg, problem)

    header = ["t"] + [f"x_{i + 1}" for i in range(cfg.m)]
    columns = [grid] + [approx[:, i] for i in range(cfg.m)]
    if reference is not None:
        ref = np.array([np.asarray(reference(float(t)), dtype=float) for t in grid])
        err = np.abs(approx - ref)
        header += [f"ref_{i + 1}" for i in range(cfg.m)] + [f"err_{i + 1}" for i in range(cfg.m)]
        columns += [ref[:, i] for i in range(cfg.m)] + [err[:, i] for i in range(cfg.m)]
    rows = ([_fmt(col[k]) for col in columns] for k in range(grid.size))
    path = _out_path(args, cfg.solution_csv)
    _write_csv(path, header, rows)

    print(f"residual_norm = {_fmt(sol.residual_norm)}")
    if reference is not None:
        linf = np.max(np.abs(approx - ref), axis=0)
        for i in range(cfg.m):
            print(f"linf_error_{i + 1} = {_fmt(float(linf[i]))}")
    print(f"wrote {path}")
    return 0


def _cmd_converge(args) -> int:
    cfg = parse_config_file(args.config)
    if args.dump_config:
        sys.stdout.write(dump_config(cfg))
        return 0
    if args.j_min < 0 or args.j_min > args.j_max:
        raise ConfigError(f"need 0 <= j_min <= j_max, got {args.j_min}..{args.j_max}")
    problem = cfg.problem()
    reference = _reference_for(cfg, problem)
    if reference is None:
        raise ConfigError(
            "convergence sweeps need a reference: homogeneous problem or reference<i> terms"
        )
    levels = list(range(args.j_min, args.j_max + 1))

    def run(j: int):
        coll = CollocationConfig(n=cfg.n, j=j, T=cfg.T)  # sweep rule: s = j + 1
        sol = solve(problem, coll)
        return linf_error(sol, reference, grid_level=coll.s + 2, gamma=cfg.gamma)

    workers = args.threads if args.threads else (os.cpu_count() or 1)
    if workers > 1 and len(levels) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, levels))
    else:
        reports = [run(j) for j in levels]

    rho = [tuple(float("nan") for _ in range(cfg.m))]
    rho += [pair_orders(c, f) for c, f in zip(reports, reports[1:])]

    header = ["j"] + [f"err_{i + 1}" for i in range(cfg.m)] + [f"rho_{i + 1}" for i in range(cfg.m)]
    rows = []
    for k, report in enumerate(reports):
        cells = [str(report.j)]
        cells += [_fmt(e) for e in report.per_component_linf]
        if k == 0:
            cells += ["" for _ in range(cfg.m)]
        else:
            cells += ["" if np.isnan(r) else _fmt(r) for r in rho[k]]
        rows.append(cells)
    path = _out_path(args, cfg.convergence_csv)
    _write_csv(path, header, rows)

    print(f"{'j':>3s} " + " ".join(f"{h:>12s}" for h in header[1:]))
    for cells in rows:
        padded = [f"{c:>12.12s}" if c else f"{'-':>12s}" for c in cells[1:]]
        print(f"{cells[0]:>3s} " + " ".join(padded))
    print(f"wrote {path}")
    return 0


def _cmd_basis(args) -> int:
    if not 0.0 < args.gamma <= 1.0:
        raise ConfigError(f"gamma must lie in (0, 1], got {args.gamma}")
    if args.degree < 1:
        raise ConfigError("basis tables need spline degree n >= 1")
    if args.step <= 0.0:
        raise ConfigError(f"grid step must be positive, got {args.step}")
    n, j = args.degree, args.level
    stop = (n + 2.0) / float(2**j)
    ts = np.arange(0.0, stop + 0.5 * args.step, args.step)
    rows = []
    for ell in range(-n, 1):  # boundary translates plus the first interior one
        idx = BasisIndex(n, j, ell)
        phi = basis_eval(idx, ts)
        dphi = caputo_basis(idx, args.gamma, ts)
        for k, t in enumerate(ts):
            rows.append([str(ell), _fmt(float(t)), _fmt(float(phi[k])), _fmt(float(dphi[k]))])
    path = _out_path(args, "basis.csv")
    _write_csv(path, ["ell", "t", "phi", "dgamma_phi"], rows)
    print(f"wrote {path}")
    return 0


def _cmd_ml(args) -> int:
    if args.step <= 0.0:
        raise ConfigError(f"step must be positive, got {args.step}")
    if args.z_min > args.z_max:
        raise ConfigError(f"need z_min <= z_max, got {args.z_min}..{args.z_max}")
    if max(abs(args.z_min), abs(args.z_max)) > DEFAULT_Z_MAX:
        raise ConfigError(
            f"range [{args.z_min}, {args.z_max}] leaves the series trust region "
            f"|z| <= {DEFAULT_Z_MAX}"
        )
    params = MLParams(args.gamma, args.beta)
    zs = np.arange(args.z_min, args.z_max + 0.5 * args.step, args.step)
    rows = [[_fmt(float(z)), _fmt(ml_scalar(params, float(z)))] for z in zs]
    path = _out_path(args, "ml.csv")
    _write_csv(path, ["z", "value"], rows)
    print(f"wrote {path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracspline",
        description="Spline-collocation solver for linear fractional dynamical systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one configured problem and dump solution.csv")
    p_solve.add_argument("--config", required=True, help="path to the run configuration")
    p_solve.add_argument("--out", default=".", help="output directory (default: .)")
    p_solve.add_argument("--grid-level", type=int, default=None,
                         help="dyadic level of the sample grid (default: s + 2)")
    p_solve.add_argument("--dump-config", action="store_true",
                         help="print the normalized config and exit")
    p_solve.set_defaults(func=_cmd_solve)

    p_conv = sub.add_parser("converge", help="run a level sweep and dump convergence.csv")
    p_conv.add_argument("--config", required=True)
    p_conv.add_argument("--j-min", type=int, required=True)
    p_conv.add_argument("--j-max", type=int, required=True)
    p_conv.add_argument("--out", default=".")
    p_conv.add_argument("--threads", type=int, default=0,
                        help="parallel solves across levels (default: machine parallelism)")
    p_conv.add_argument("--dump-config", action="store_true")
    p_conv.set_defaults(func=_cmd_converge)

    p_basis = sub.add_parser("basis", help="tabulate boundary basis functions and D^gamma")
    p_basis.add_argument("--degree", type=int, required=True)
    p_basis.add_argument("--gamma", type=float, required=True)
    p_basis.add_argument("--level", type=int, default=0)
    p_basis.add_argument("--step", type=float, default=0.01)
    p_basis.add_argument("--out", default=".")
    p_basis.set_defaults(func=_cmd_basis)

    p_ml = sub.add_parser("ml", help="tabulate the scalar Mittag-Leffler function")
    p_ml.add_argument("--gamma", type=float, required=True)
    p_ml.add_argument("--beta", type=float, default=1.0)
    p_ml.add_argument("--z-min", type=float, required=True)
    p_ml.add_argument("--z-max", type=float, required=True)
    p_ml.add_argument("--step", type=float, required=True)
    p_ml.add_argument("--out", default=".")
    p_ml.set_defaults(func=_cmd_ml)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
