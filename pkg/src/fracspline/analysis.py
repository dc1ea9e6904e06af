"""Error measurement, empirical convergence orders, and the two preset experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .mittag_leffler import MLParams, SystemMatrix, ml_matrix
from .solver import (
    CollocationConfig,
    ForcingTerm,
    FractionalProblem,
    SplineSolution,
    collocation_grid,
    make_forcing,
    sample_solution,
    solve,
)

__all__ = [
    "ErrorReport",
    "ConvergenceReport",
    "linf_error",
    "estimate_order",
    "run_example1",
    "run_example2",
    "stability_check",
    "pair_orders",
    "example1_problem",
    "example2_problem",
    "EXAMPLE2_MATRIX",
]

#: errors below this are indistinguishable from rounding noise; order
#: estimates over such pairs are meaningless and reported as NaN
NOISE_FLOOR = 1e-13

EXAMPLE2_MATRIX = np.array([[-1.5, 0.5], [0.5, -1.5]])


@dataclass(frozen=True)
class ErrorReport:
    """Componentwise max-norm errors of one solve against a reference."""

    gamma: float
    n: int
    j: int
    s: int
    per_component_linf: tuple[float, ...]
    sample_grid_level: int

    def __post_init__(self):
        if any(e < 0.0 for e in self.per_component_linf):
            raise ValueError("errors must be non-negative")


@dataclass(frozen=True)
class ConvergenceReport:
    """Errors across levels plus the adjacent-pair order estimates.

    ``rho[k][i]`` estimates the order between levels[k] and levels[k+1]
    for component i; NaN marks pairs excluded by the noise floor.
    """

    gamma: float
    n: int
    levels: tuple[int, ...]
    errors: tuple[ErrorReport, ...]
    rho: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.rho) != max(len(self.levels) - 1, 0):
            raise ValueError("need exactly one order estimate per adjacent level pair")


def linf_error(
    sol: SplineSolution,
    reference: Callable[[float], np.ndarray],
    grid_level: int,
    *,
    gamma: float = float("nan"),
) -> ErrorReport:
    """Max absolute componentwise error on the dyadic grid of the given level."""
    cfg = sol.config
    grid = collocation_grid(grid_level, cfg.T)
    approx = sample_solution(sol, grid)
    ref = np.array([np.asarray(reference(float(t)), dtype=float) for t in grid])
    errs = np.max(np.abs(approx - ref), axis=0)
    return ErrorReport(
        gamma=gamma,
        n=cfg.n,
        j=cfg.j,
        s=cfg.s,
        per_component_linf=tuple(float(e) for e in errs),
        sample_grid_level=grid_level,
    )


def estimate_order(e_j: float, e_j1: float) -> float:
    """log2 of the error ratio between two successive levels."""
    if e_j <= 0.0 or e_j1 <= 0.0:
        raise ValueError("order estimation needs strictly positive errors")
    return math.log2(e_j / e_j1)


def pair_orders(coarse: ErrorReport, fine: ErrorReport) -> tuple[float, ...]:
    out = []
    for e_c, e_f in zip(coarse.per_component_linf, fine.per_component_linf):
        if e_c < NOISE_FLOOR or e_f < NOISE_FLOOR:
            out.append(float("nan"))
        else:
            out.append(estimate_order(e_c, e_f))
    return tuple(out)


def example1_problem(gamma: float) -> FractionalProblem:
    """Scalar forced test problem with exact solution x(t) = t^2 on [0, 1].

    D^g x = -x + t^2 + D^g(t^2), x(0) = 0; the forcing makes t^2 solve
    the equation for every order, and the quadratic lies in every spline
    space of degree >= 2, so collocation reproduces it to rounding.
    """
    terms = [[ForcingTerm("poly", 2.0, 1.0), ForcingTerm("caputo_power", 2.0, 1.0)]]
    return FractionalProblem(
        A=np.array([[-1.0]]),
        X0=np.array([0.0]),
        gamma=gamma,
        T=1,
        forcing=make_forcing(terms, gamma),
    )


def example2_problem(gamma: float) -> FractionalProblem:
    """Symmetric 2x2 homogeneous system with eigenvalues -1 and -2 on [0, 1]."""
    return FractionalProblem(
        A=EXAMPLE2_MATRIX.copy(),
        X0=np.array([1.0, 2.0]),
        gamma=gamma,
        T=1,
    )


def run_example1(gamma: float, n: int, j: int) -> ErrorReport:
    """Solve the forced quadratic problem and measure the error against t^2."""
    problem = example1_problem(gamma)
    config = CollocationConfig(n=n, j=j, T=1)
    sol = solve(problem, config)
    return linf_error(sol, lambda t: np.array([t * t]), grid_level=config.s + 2, gamma=gamma)


def _example2_reference(gamma: float) -> Callable[[float], np.ndarray]:
    problem = example2_problem(gamma)
    sysmat = SystemMatrix(problem.A)
    params = MLParams(gamma, 1.0)
    x0 = problem.X0

    def reference(t: float) -> np.ndarray:
        if t == 0.0:
            return x0.copy()
        return ml_matrix(params, t**gamma, sysmat) @ x0

    return reference


def run_example2(gamma: float, n: int, j_range: Sequence[int]) -> ConvergenceReport:
    """Level sweep of the 2x2 system against its Mittag-Leffler reference.

    For gamma = 1 the reference degenerates to the matrix exponential
    e^{At} X0, i.e. the classical first-order system.
    """
    levels = tuple(int(j) for j in j_range)
    if not levels:
        raise ValueError("need at least one level")
    problem = example2_problem(gamma)
    reference = _example2_reference(gamma)
    reports = []
    for j in levels:
        config = CollocationConfig(n=n, j=j, T=1)
        sol = solve(problem, config)
        reports.append(linf_error(sol, reference, grid_level=config.s + 2, gamma=gamma))
    rho = tuple(pair_orders(c, f) for c, f in zip(reports, reports[1:]))
    return ConvergenceReport(gamma=gamma, n=n, levels=levels, errors=tuple(reports), rho=rho)


def stability_check(A) -> bool:
    """True when every eigenvalue has strictly negative real part.

    Advisory only; a False result never blocks a solve.
    """
    if isinstance(A, SystemMatrix):
        eigvals = A.eigenvalues
        if eigvals is None:
            eigvals = np.linalg.eigvals(A.matrix)
    else:
        eigvals = np.linalg.eigvals(np.asarray(A, dtype=float))
    return bool(np.all(np.real(eigvals) < 0.0))
