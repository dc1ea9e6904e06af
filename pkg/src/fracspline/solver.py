"""Least-squares collocation for D^g X = A X + F on dyadic spline spaces.

The approximant X_j(t) = sum_l C_l phi_{j,l}(t) is forced to satisfy the
system at the dyadic points t_p = p / 2^s, 1 <= p <= 2^s T, together
with the initial condition X_j(0) = X0.  Stacking the m components gives
an m (2^s T + 1) by m (2^j T + n) overdetermined system that is solved
in the least-squares sense by a pivoted orthogonal factorization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from . import bspline, caputo
from .bspline import ActiveBasis, BasisIndex, active_basis, basis_eval
from .errors import NumericsError

__all__ = [
    "ForcingTerm",
    "make_forcing",
    "FractionalProblem",
    "CollocationConfig",
    "CollocationMatrices",
    "SplineSolution",
    "collocation_grid",
    "assemble",
    "solve",
    "evaluate_solution",
    "sample_solution",
    "collocation_residual",
]

#: singular values below RANK_TOL * sigma_max flag the system as rank deficient
RANK_TOL = 1e-12


@dataclass(frozen=True)
class ForcingTerm:
    """One forcing summand.

    kind "poly" is coef * t^p; kind "caputo_power" is
    coef * Gamma(p+1)/Gamma(p+1-gamma) * t^(p-gamma), i.e. coef times the
    Caputo derivative of t^p at the problem's own order.
    """

    kind: str
    power: float
    coef: float

    def __post_init__(self):
        if self.kind not in ("poly", "caputo_power"):
            raise ValueError(f"unknown forcing term kind {self.kind!r}")
        if self.kind == "caputo_power" and self.power < 1.0:
            raise ValueError("caputo_power terms require power >= 1")

    def evaluate(self, t: float, gamma: float) -> float:
        if self.kind == "poly":
            return self.coef * t**self.power
        return self.coef * caputo.caputo_of_power(self.power, gamma, t)


def make_forcing(
    terms: Sequence[Sequence[ForcingTerm]], gamma: float
) -> tuple[Callable[[float], float], ...]:
    """Turn per-component term lists into per-component evaluators."""

    def component(term_list):
        frozen = tuple(term_list)
        return lambda t: math.fsum(term.evaluate(t, gamma) for term in frozen)

    return tuple(component(tl) for tl in terms)


@dataclass(frozen=True, eq=False)
class FractionalProblem:
    """The system D^g X(t) = A X(t) + F(t) on [0, T] with X(0) = X0.

    ``forcing`` is either None (homogeneous) or a tuple of m scalar
    evaluators, one per component.
    """

    A: np.ndarray
    X0: np.ndarray
    gamma: float
    T: int = 1
    forcing: Optional[tuple[Callable[[float], float], ...]] = None

    def __post_init__(self):
        a = np.array(self.A, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"A must be a square matrix, got shape {a.shape}")
        x0 = np.array(self.X0, dtype=float).reshape(-1)
        if x0.shape[0] != a.shape[0]:
            raise ValueError(f"X0 has length {x0.shape[0]}, expected {a.shape[0]}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not isinstance(self.T, (int, np.integer)) or self.T < 1:
            raise ValueError(f"horizon T must be a positive integer, got {self.T!r}")
        if self.forcing is not None:
            forcing = tuple(self.forcing)
            if len(forcing) != a.shape[0]:
                raise ValueError(
                    f"forcing needs one evaluator per component, got {len(forcing)} for m={a.shape[0]}"
                )
            object.__setattr__(self, "forcing", forcing)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "X0", x0)

    @property
    def m(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class CollocationConfig:
    """Discretization knobs: spline degree n, space level j, collocation level s.

    s defaults to j + 1.  Construction enforces the solvability condition
    2^s T + 1 >= 2^j T + n so the stacked system has at least as many
    equations as unknowns.
    """

    n: int
    j: int
    s: Optional[int] = None
    T: int = 1

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"degree must be >= 0, got {self.n}")
        if self.j < 0:
            raise ValueError(f"level must be >= 0, got {self.j}")
        if not isinstance(self.T, (int, np.integer)) or self.T < 1:
            raise ValueError(f"horizon T must be a positive integer, got {self.T!r}")
        if self.s is None:
            object.__setattr__(self, "s", self.j + 1)
        if self.s < 0:
            raise ValueError(f"collocation level must be >= 0, got {self.s}")
        if (1 << self.s) * self.T + 1 < (1 << self.j) * self.T + self.n:
            raise ValueError(
                f"solvability condition violated: 2^s*T + 1 = {(1 << self.s) * self.T + 1} "
                f"< 2^j*T + n = {(1 << self.j) * self.T + self.n}"
            )

    @property
    def unknowns_per_component(self) -> int:
        return (1 << self.j) * self.T + self.n

    @property
    def points(self) -> int:
        return (1 << self.s) * self.T

    def basis(self) -> ActiveBasis:
        return active_basis(self.n, self.j, self.T)


@dataclass(frozen=True, eq=False)
class CollocationMatrices:
    """Sampled basis data: G holds D^g phi_{j,l}(t_p), B holds phi_{j,l}(t_p).

    Rows run over the collocation points p = 1 .. 2^s T; columns follow
    the active-basis order l = -n .. 2^j T - 1.  phi0 is the row of
    basis values at t = 0 used by the initial-condition block.
    """

    G: np.ndarray
    B: np.ndarray
    phi0: np.ndarray


@dataclass(frozen=True, eq=False)
class SplineSolution:
    """Spline coefficients of a solved problem; row i holds component i."""

    config: CollocationConfig
    coeffs: np.ndarray
    residual_norm: float

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]


def collocation_grid(s: int, T: int) -> np.ndarray:
    """The dyadic points p / 2^s for p = 0 .. 2^s T."""
    if s < 0:
        raise ValueError(f"level must be >= 0, got {s}")
    if T < 1:
        raise ValueError(f"horizon must be >= 1, got {T}")
    return np.arange((1 << s) * T + 1, dtype=float) / float(1 << s)


def assemble(problem: FractionalProblem, config: CollocationConfig) -> CollocationMatrices:
    """Sample the basis and its fractional derivative on the collocation points."""
    if config.T != problem.T:
        raise ValueError(f"config horizon {config.T} does not match problem horizon {problem.T}")
    if problem.gamma < 1.0 and config.n < 1:
        raise ValueError("fractional orders need spline degree n >= 1")
    points = collocation_grid(config.s, config.T)[1:]  # t = 0 feeds only phi0
    basis = config.basis()
    num_cols = len(basis)
    G = np.zeros((points.size, num_cols))
    B = np.zeros((points.size, num_cols))
    phi0 = np.zeros(num_cols)
    for col, idx in enumerate(basis.basis_indices()):
        G[:, col] = caputo.caputo_basis(idx, problem.gamma, points)
        B[:, col] = basis_eval(idx, points)
        if idx.ell < 0:
            phi0[col] = 2.0 ** (idx.j / 2.0) * bspline.bspline_eval(idx.n, float(-idx.ell))
    return CollocationMatrices(G=G, B=B, phi0=phi0)


def _stacked_system(
    problem: FractionalProblem,
    config: CollocationConfig,
    mats: CollocationMatrices,
    ic_weight: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Compose the block rows of (I_m x G - A x B) over (I_m x phi0).

    The Kronecker blocks are written straight into one dense matrix;
    no m(2^sT) x m(2^jT+n) Kronecker factors are materialized.
    """
    m = problem.m
    rows_per_comp = mats.G.shape[0]
    num_cols = mats.G.shape[1]
    matrix = np.zeros((m * (rows_per_comp + 1), m * num_cols))
    rhs = np.zeros(m * (rows_per_comp + 1))
    points = collocation_grid(config.s, config.T)[1:]
    for i in range(m):
        block = slice(i * rows_per_comp, (i + 1) * rows_per_comp)
        matrix[block, i * num_cols : (i + 1) * num_cols] += mats.G
        for q in range(m):
            matrix[block, q * num_cols : (q + 1) * num_cols] -= problem.A[i, q] * mats.B
        if problem.forcing is not None:
            f_i = problem.forcing[i]
            rhs[block] = [f_i(float(t)) for t in points]
        ic_row = m * rows_per_comp + i
        matrix[ic_row, i * num_cols : (i + 1) * num_cols] = ic_weight * mats.phi0
        rhs[ic_row] = ic_weight * problem.X0[i]
    return matrix, rhs


def solve(
    problem: FractionalProblem,
    config: CollocationConfig,
    *,
    ic_weight: float = 1.0,
) -> SplineSolution:
    """Assemble and solve the collocation system in the least-squares sense.

    All rows carry unit weight by default; ``ic_weight`` rescales the
    initial-condition rows relative to the collocation rows.
    """
    mats = assemble(problem, config)
    matrix, rhs = _stacked_system(problem, config, mats, ic_weight)
    coeffs, _, rank, _ = scipy.linalg.lstsq(matrix, rhs, cond=RANK_TOL, lapack_driver="gelsy")
    if rank < matrix.shape[1]:
        raise NumericsError(
            f"collocation system is rank deficient: rank {rank} < {matrix.shape[1]} unknowns"
        )
    residual_norm = float(np.linalg.norm(matrix @ coeffs - rhs))
    return SplineSolution(
        config=config,
        coeffs=coeffs.reshape(problem.m, config.unknowns_per_component),
        residual_norm=residual_norm,
    )


def evaluate_solution(sol: SplineSolution, t: float) -> np.ndarray:
    """X_j(t) for a single t in [0, T]; touches at most n + 1 basis functions."""
    cfg = sol.config
    if not 0.0 <= t <= cfg.T:
        raise ValueError(f"t = {t} outside the solution domain [0, {cfg.T}]")
    u = math.ldexp(t, cfg.j)
    last = (1 << cfg.j) * cfg.T - 1
    lo = max(-cfg.n, int(math.floor(u)) - cfg.n)
    hi = min(last, int(math.floor(u)))
    out = np.zeros(sol.m)
    for ell in range(lo, hi + 1):
        value = basis_eval(BasisIndex(cfg.n, cfg.j, ell), t)
        if value != 0.0:
            out += sol.coeffs[:, ell + cfg.n] * value
    return out


def sample_solution(sol: SplineSolution, ts: np.ndarray) -> np.ndarray:
    """X_j on a grid of times; returns an array of shape (len(ts), m)."""
    ts = np.asarray(ts, dtype=float)
    cfg = sol.config
    if ts.size and (ts.min() < 0.0 or ts.max() > cfg.T):
        raise ValueError(f"samples outside the solution domain [0, {cfg.T}]")
    out = np.zeros((ts.size, sol.m))
    for col, idx in enumerate(cfg.basis().basis_indices()):
        values = basis_eval(idx, ts)
        nz = values != 0.0
        if nz.any():
            out[nz] += np.outer(values[nz], sol.coeffs[:, col])
    return out


def collocation_residual(sol: SplineSolution, problem: FractionalProblem, t: float) -> np.ndarray:
    """Pointwise equation residual D^g X_j(t) - A X_j(t) - F(t).

    The fractional derivative keeps memory of every basis function whose
    support starts before t, so this sums over all of them; a diagnostic,
    not a solver path.
    """
    cfg = sol.config
    if not 0.0 < t <= cfg.T:
        raise ValueError(f"t = {t} outside (0, {cfg.T}]")
    deriv = np.zeros(sol.m)
    state = np.zeros(sol.m)
    for col, idx in enumerate(cfg.basis().basis_indices()):
        if idx.support[0] < t:
            deriv += sol.coeffs[:, col] * caputo.caputo_basis(idx, problem.gamma, t)
            state += sol.coeffs[:, col] * basis_eval(idx, t)
    residual = deriv - problem.A @ state
    if problem.forcing is not None:
        residual -= np.array([f(t) for f in problem.forcing])
    return residual
