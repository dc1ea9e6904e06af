"""Scalar and matrix Mittag-Leffler functions E_{g,b}(z) = sum_k z^k / Gamma(g k + b).

The scalar series is summed with compensated (Kahan) accumulation and a
stopping rule of three consecutive negligible terms; single accidentally
small terms occur in the alternating regime z < 0 and must not stop the
sum.  For z < 0 with 0 < g < 1 the alternating series cancels
catastrophically once its largest term outgrows a small cap, so that
regime is evaluated instead through the completely monotone branch-cut
representation

    E_{g,b}(-x) = (1/(g pi)) * int_0^inf exp(-v^{1/g}) v^{(1-b)/g}
                  * (v sin(pi b) - x sin(pi (g - b)))
                  / (v^2 + 2 x v cos(pi g) + x^2) dv,

valid for b < 1 + g, which an adaptive rule evaluates to near machine
precision.  Matrices are handled by eigendecomposition when the
eigenvector basis is well conditioned, with a direct matrix series as
the small-matrix fallback.
"""

from __future__ import annotations

import math
import warnings
import weakref
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import NumericsError

__all__ = [
    "MLParams",
    "SystemMatrix",
    "ml_scalar",
    "ml_matrix",
    "reference_solution",
]

#: largest admissible |z| for the scalar evaluator
DEFAULT_Z_MAX = 50.0
#: series term budget
DEFAULT_MAX_TERMS = 500
#: once the largest series term exceeds this, the alternating sum has lost
#: too many digits and the integral representation takes over
_SERIES_PEAK_CAP = 300.0
_NEGLIGIBLE = 1e-16


@dataclass(frozen=True)
class MLParams:
    """Order pair (gamma, beta) of E_{gamma,beta}; both must be positive."""

    gamma: float
    beta: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")


def _series(gamma: float, beta: float, z, max_terms: int):
    """Plain power series with Kahan summation; works for real or complex z."""
    total = 0.0 * z + 0.0
    comp = 0.0 * z
    power = 1.0 + 0.0 * z
    consecutive = 0
    log_abs_z = math.log(abs(z)) if z != 0 else None
    for k in range(max_terms):
        arg = gamma * k + beta
        if k > 0:
            if z == 0:
                return total
            power = power * z
        if arg <= 170.0 and abs(power) < 1e280:
            term = power / math.gamma(arg)
        else:
            # stay in log space once factors leave the double range
            lt = k * log_abs_z - math.lgamma(arg)
            if lt > 667.0:
                raise NumericsError(
                    f"Mittag-Leffler series overflow for gamma={gamma}, beta={beta}, z={z}"
                )
            mag = math.exp(lt) if lt > -745.0 else 0.0
            if isinstance(z, complex):
                if mag == 0.0:
                    term = 0.0j
                elif math.isfinite(abs(power)) and abs(power) > 0.0:
                    term = mag * (power / abs(power))
                else:
                    raise NumericsError(
                        f"Mittag-Leffler series overflow for complex argument z={z}"
                    )
            else:
                term = mag if (z > 0.0 or k % 2 == 0) else -mag
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) <= _NEGLIGIBLE * max(abs(total), 1e-300):
            consecutive += 1
            if consecutive >= 3:
                return total
        else:
            consecutive = 0
    raise NumericsError(
        f"Mittag-Leffler series exhausted {max_terms} terms for gamma={gamma}, beta={beta}, z={z}"
    )


def _peak_log_term(gamma: float, beta: float, z: float, max_terms: int) -> float:
    """log of the largest series term; the cancellation-severity estimate."""
    if z == 0.0:
        return -math.lgamma(beta)
    log_abs_z = math.log(abs(z))
    peak = -math.lgamma(beta)
    for k in range(1, max_terms + 1):
        lt = k * log_abs_z - math.lgamma(gamma * k + beta)
        peak = max(peak, lt)
        if lt < peak - 80.0:
            break
    return peak


def _negative_axis_integral(gamma: float, beta: float, x: float) -> float:
    """Branch-cut integral for E_{gamma,beta}(-x), x > 0, 0 < gamma < 1, beta < 1 + gamma."""
    cos_g = math.cos(math.pi * gamma)
    sin_b = math.sin(math.pi * beta)
    sin_gb = math.sin(math.pi * (gamma - beta))
    v_max = 745.0**gamma  # exp(-v^{1/g}) underflows beyond
    alg = (1.0 - beta) / gamma  # algebraic weight exponent at v = 0

    def f(v):
        den = v * v + 2.0 * x * v * cos_g + x * x
        core = math.exp(-(v ** (1.0 / gamma))) * (v * sin_b - x * sin_gb) / den
        return core if alg == 0.0 else core * v**alg

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, estimate = quad(f, 0.0, v_max, limit=300, epsabs=1e-14, epsrel=1e-13)
    if estimate > 1e-10:
        raise NumericsError(
            f"branch-cut integral for E_({gamma},{beta})(-{x}) did not converge "
            f"(error estimate {estimate:g})"
        )
    return value / (gamma * math.pi)


@lru_cache(maxsize=1 << 17)
def _ml_real(gamma: float, beta: float, z: float, z_max: float, max_terms: int) -> float:
    if abs(z) > z_max:
        raise ValueError(
            f"|z| = {abs(z)} exceeds the trust region z_max = {z_max} of the series evaluator"
        )
    if z >= 0.0 or gamma > 1.0:
        return _series(gamma, beta, z, max_terms)
    if _peak_log_term(gamma, beta, z, max_terms) <= math.log(_SERIES_PEAK_CAP):
        return _series(gamma, beta, z, max_terms)
    # alternating series past the cancellation cap
    if gamma == 1.0:
        if beta == 1.0:
            return math.exp(z)
        raise NumericsError(
            f"E_(1,{beta})({z}) is outside the series trust region and has no "
            "integral representation here"
        )
    if beta < 1.0 + gamma:
        return _negative_axis_integral(gamma, beta, -z)
    raise NumericsError(
        f"E_({gamma},{beta})({z}) is outside the series trust region "
        f"(requires beta < 1 + gamma for the branch-cut route)"
    )


def ml_scalar(params: MLParams, z: float, *, z_max: float = DEFAULT_Z_MAX,
              max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """Evaluate E_{gamma,beta}(z) for real z with |z| <= z_max.

    Raises ValueError outside the trust region and NumericsError when
    the term budget is exhausted or no accurate route exists.
    """
    return _ml_real(params.gamma, params.beta, float(z), float(z_max), int(max_terms))


def _eigen_data(matrix: np.ndarray, cond_cap: float):
    """(eigenvalues, V, V^-1) when the eigenvector basis is usable, else None."""
    if np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(matrix).max()))):
        w, v = np.linalg.eigh(matrix)
        return w, v, v.T
    w, v = np.linalg.eig(matrix)
    try:
        cond = np.linalg.cond(v)
    except np.linalg.LinAlgError:
        return None
    if not np.isfinite(cond) or cond > cond_cap:
        return None
    return w, v, np.linalg.inv(v)


@dataclass(frozen=True, eq=False)
class SystemMatrix:
    """A real system matrix with its eigendecomposition computed once.

    ``eigen_data`` style fields are populated at construction when the
    matrix is diagonalizable with eigenvector condition number below
    ``cond_cap``; otherwise they stay None and matrix-function callers
    must fall back to the series route.
    """

    matrix: np.ndarray
    cond_cap: float = 1e8
    eigenvalues: np.ndarray | None = field(init=False, default=None)
    eigenvectors: np.ndarray | None = field(init=False, default=None)
    inv_eigenvectors: np.ndarray | None = field(init=False, default=None)

    def __post_init__(self):
        a = np.array(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"system matrix must be square, got shape {a.shape}")
        object.__setattr__(self, "matrix", a)
        data = _eigen_data(a, self.cond_cap)
        if data is not None:
            w, v, vinv = data
            object.__setattr__(self, "eigenvalues", w)
            object.__setattr__(self, "eigenvectors", v)
            object.__setattr__(self, "inv_eigenvectors", vinv)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def has_eigen_data(self) -> bool:
        return self.eigenvalues is not None


def _ml_matrix_series(gamma: float, beta: float, scaled: np.ndarray, max_terms: int) -> np.ndarray:
    """Direct matrix series sum_k scaled^k / Gamma(gamma k + beta)."""
    m = scaled.shape[0]
    total = np.eye(m) / math.gamma(beta)
    power = np.eye(m)
    consecutive = 0
    for k in range(1, max_terms):
        power = power @ scaled
        arg = gamma * k + beta
        if arg > 170.0:
            break  # remaining terms are zero to double precision at this radius
        term = power / math.gamma(arg)
        total = total + term
        scale = max(float(np.abs(total).max()), 1e-300)
        if float(np.abs(term).max()) <= _NEGLIGIBLE * scale:
            consecutive += 1
            if consecutive >= 3:
                return total
        else:
            consecutive = 0
    if consecutive == 0:
        raise NumericsError(f"matrix Mittag-Leffler series exhausted {max_terms} terms")
    return total


_SERIES_FALLBACK_DIM = 8
_SERIES_FALLBACK_RADIUS = 5.0


def ml_matrix(params: MLParams, z_scale: float, A) -> np.ndarray:
    """Matrix Mittag-Leffler E_{gamma,beta}(z_scale * A) for a real matrix A.

    Primary route: V diag(E(z lambda_i)) V^-1 from the precomputed
    eigendecomposition.  Fallback for small non-diagonalizable matrices
    (dim <= 8, spectral radius of z*A <= 5): the direct matrix series.
    """
    if not isinstance(A, SystemMatrix):
        A = SystemMatrix(np.asarray(A, dtype=float))
    if z_scale < 0.0:
        raise ValueError(f"scalar argument must be non-negative, got {z_scale}")
    m = A.dim
    if z_scale == 0.0:
        return np.eye(m) / math.gamma(params.beta)
    mat = A.matrix
    if np.count_nonzero(mat - np.diag(np.diagonal(mat))) == 0:
        return np.diag([ml_scalar(params, z_scale * d) for d in np.diagonal(mat)])
    if A.has_eigen_data:
        w, v, vinv = A.eigenvalues, A.eigenvectors, A.inv_eigenvectors
        if np.isrealobj(w):
            vals = np.array([ml_scalar(params, z_scale * lam) for lam in w])
            return (v * vals) @ vinv
        vals = np.array(
            [_series(params.gamma, params.beta, complex(z_scale * lam), DEFAULT_MAX_TERMS)
             for lam in w]
        )
        out = (v * vals) @ vinv
        if float(np.abs(out.imag).max()) > 1e-8 * max(1.0, float(np.abs(out.real).max())):
            raise NumericsError("eigen route produced a non-real matrix function of a real matrix")
        return out.real
    radius = float(np.max(np.abs(np.linalg.eigvals(mat)))) * z_scale
    if m <= _SERIES_FALLBACK_DIM and radius <= _SERIES_FALLBACK_RADIUS:
        return _ml_matrix_series(params.gamma, params.beta, z_scale * mat, DEFAULT_MAX_TERMS)
    raise ValueError(
        "matrix is defective or its eigenvector basis is ill-conditioned, and the "
        f"series fallback bounds (dim <= {_SERIES_FALLBACK_DIM}, spectral radius "
        f"<= {_SERIES_FALLBACK_RADIUS}) are exceeded"
    )


_problem_matrices: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def reference_solution(problem, t: float) -> np.ndarray:
    """Exact homogeneous-system state E_{gamma,1}(t^gamma A) X0 at time t.

    Only valid without forcing; with forcing the caller must supply an
    analytic reference instead.
    """
    if problem.forcing is not None:
        raise ValueError("the Mittag-Leffler reference covers only homogeneous problems")
    if t < 0.0:
        raise ValueError(f"time must be non-negative, got {t}")
    x0 = np.asarray(problem.X0, dtype=float)
    if t == 0.0:
        return x0.copy()
    sysmat = _problem_matrices.get(problem)
    if sysmat is None:
        sysmat = SystemMatrix(np.asarray(problem.A, dtype=float))
        _problem_matrices[problem] = sysmat
    return ml_matrix(MLParams(problem.gamma, 1.0), t**problem.gamma, sysmat) @ x0
