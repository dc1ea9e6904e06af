"""Closed-form Caputo derivatives of the B-spline basis, plus a quadrature oracle.

For interior translates (ell >= 0) the fractional derivative of order
0 < gamma < 1 is the fractional-degree spline

    D^g B_{n,ell}(t) = (1/Gamma(n+1-g)) * sum_r (-1)^r C(n+1, r) (t-ell-r)_+^{n-g}.

Left-edge translates (-n <= ell <= -1) lose the part of their support
below 0, which adds an explicit correction term: the fractional
integral of B'_n over [0, -ell], expanded in closed form as a double
sum over r and p (see :class:`EdgeExpansion`).

Both expressions are alternating sums whose summands grow like
(t-ell)^{n-g} while the value decays like (t-ell)^{-g-1}, so for large
arguments they are re-expanded in cancellation-free descending power
series (a backward-difference expansion with Stirling-number weights
for the interior part, a moment expansion of the kernel for the edge
correction).  The crossover sits one knot beyond the support end, at
t - ell = n + 2.

An independent adaptive-quadrature evaluator of the defining integral
is provided for validation; it is never used by the solver itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .bspline import BasisIndex, _alt_binomial, _asfloat, bspline_derivative
from .errors import NumericsError

__all__ = [
    "EdgeExpansion",
    "caputo_interior",
    "caputo_edge",
    "caputo_basis",
    "caputo_quadrature",
    "caputo_of_power",
]

#: arguments v = t - ell at or beyond this multiple of the knot spacing
#: are evaluated with the descending far-field series
_FAR_CUTOVER_OFFSET = 2


def _check_order(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"fractional order must lie strictly in (0, 1), got {gamma}")


def _check_smoothness(n: int) -> None:
    if n < 1:
        raise ValueError("fractional differentiation needs spline degree n >= 1")


@lru_cache(maxsize=None)
def _stirling2_row(m: int, qmax: int) -> tuple:
    """Stirling numbers of the second kind S(q, m) for q = 0..qmax."""
    row = np.zeros((qmax + 1, m + 1))
    row[0, 0] = 1.0
    for q in range(1, qmax + 1):
        for k in range(1, m + 1):
            row[q, k] = k * row[q - 1, k] + row[q - 1, k - 1]
    return tuple(row[:, m])


@lru_cache(maxsize=None)
def _far_coeffs_interior(n: int, gamma: float, qmax: int = 260) -> np.ndarray:
    """Coefficients c_q of sum_r (-1)^r C(n+1,r) (v-r)^{n-g} = sum_{q>n} c_q v^{n-g-q}.

    Expanding (v-r)^{n-g} = v^{n-g} (1 - r/v)^{n-g} binomially and using
    sum_r (-1)^r C(n+1,r) r^q = (-1)^{n+1} (n+1)! S(q, n+1) kills every
    power below q = n+1, leaving a series in 1/v that converges for
    v > n+1 with ratio (n+1)/v.
    """
    s2 = _stirling2_row(n + 1, qmax)
    sign = (-1.0) ** (n + 1) * math.factorial(n + 1)
    coeffs = np.zeros(qmax + 1)
    binom = 1.0  # running C(n - gamma, q)
    a = n - gamma
    for q in range(qmax + 1):
        if q > 0:
            binom *= (a - q + 1) / q
        coeffs[q] = binom * (-1.0) ** q * sign * s2[q]
    return coeffs


def _delta_frac_near(n: int, gamma: float, v: np.ndarray) -> np.ndarray:
    """sum_r (-1)^r C(n+1,r) (v-r)_+^{n-g}, direct form for small v."""
    coeff = _alt_binomial(n + 1)
    acc = np.zeros_like(v)
    p = n - gamma
    for r in range(n + 2):
        shifted = v - r
        acc += coeff[r] * np.where(shifted > 0.0, np.maximum(shifted, 0.0) ** p, 0.0)
    return acc


def _delta_frac_far(n: int, gamma: float, v: np.ndarray) -> np.ndarray:
    coeffs = _far_coeffs_interior(n, gamma)
    x = 1.0 / v
    acc = np.zeros_like(v)
    for q in range(len(coeffs) - 1, n, -1):
        acc = acc * x + coeffs[q]
    return acc * x ** (n + 1) * v ** (n - gamma)


def _dcaputo_interior(n: int, gamma: float, v: np.ndarray) -> np.ndarray:
    """D^g B_n(v) from the support start, combining near and far forms."""
    out = np.zeros_like(v)
    cut = float(n + _FAR_CUTOVER_OFFSET)
    near = (v > 0.0) & (v < cut)
    far = v >= cut
    if near.any():
        out[near] = _delta_frac_near(n, gamma, v[near])
    if far.any():
        out[far] = _delta_frac_far(n, gamma, v[far])
    return out / math.gamma(n + 1.0 - gamma)


@dataclass(frozen=True)
class EdgeExpansion:
    """Precomputed tables for the boundary correction of one edge translate.

    The correction is the fractional integral of B'_n over the clipped
    part of the support,

        K(t) = (1/Gamma(1-g)) * int_0^{-ell} B'_n(tau) (t-ell-tau)^{-g} dtau,

    with the closed form

        K(t) = (1/Gamma(n+1-g)) * sum_{r=0}^{-ell-1} (-1)^r C(n+1,r) *
               [ (t-ell-r)^{n-g}
                 + t^{1-g} * sum_{p=0}^{n-1} c_{r,p} (t-ell-r)^p ],

        c_{r,p} = (-1)^{n-p} (-ell-r)^{n-1-p} / (n-1-p)! *
                  prod_{s=1}^{n-1-p} (g - s),

    where the empty product at p = n-1 is 1.  ``weights`` holds the
    signed binomials, ``poly`` the c_{r,p} table, and ``tail`` the
    moment-expansion coefficients used for large t - ell.  The tables
    depend only on (n, ell, gamma) and are built once via
    :func:`edge_expansion`.
    """

    n: int
    ell: int
    gamma: float
    weights: np.ndarray  # (-1)^r C(n+1, r), r = 0..-ell-1
    poly: np.ndarray  # c_{r,p}, shape (-ell, n)
    tail: np.ndarray  # d_q with K(t) = sum_q d_q (t-ell)^{-g-q}
    inv_gamma_top: float  # 1 / Gamma(n+1-g)

    def correction(self, t: np.ndarray) -> np.ndarray:
        """Closed-form K(t) for 0 < t - ell < n + 2."""
        out = np.zeros_like(t)
        t_pow = np.where(t > 0.0, np.maximum(t, 0.0) ** (1.0 - self.gamma), 0.0)
        for r in range(-self.ell):
            a = t - self.ell - r
            inner = np.zeros_like(t)
            for p in range(self.n - 1, -1, -1):
                inner = inner * a + self.poly[r, p]
            out += self.weights[r] * (a ** (self.n - self.gamma) + t_pow * inner)
        return out * self.inv_gamma_top

    def correction_tail(self, v: np.ndarray) -> np.ndarray:
        """Moment-expansion K as a function of v = t - ell >= n + 2."""
        x = 1.0 / v
        acc = np.zeros_like(v)
        for q in range(len(self.tail) - 1, -1, -1):
            acc = acc * x + self.tail[q]
        return acc * v ** (-self.gamma)


def _edge_prime_moment(n: int, ell: int, q: int) -> float:
    """mu_q = int_0^{-ell} B'_n(u) u^q du, exact from the polynomial pieces."""
    total = 0.0
    coeff = _alt_binomial(n + 1)
    for r in range(-ell):
        b = float(-ell - r)
        piece = 0.0
        for i in range(q + 1):
            r_pow = float(r) ** (q - i) if q - i > 0 else 1.0
            piece += math.comb(q, i) * r_pow * b ** (n + i) / (n + i)
        total += coeff[r] * piece
    return total / math.factorial(n - 1)


@lru_cache(maxsize=None)
def edge_expansion(n: int, ell: int, gamma: float, tail_terms: int = 150) -> EdgeExpansion:
    """Build (and cache) the correction tables for the edge translate ell of degree n."""
    _check_smoothness(n)
    _check_order(gamma)
    if not -n <= ell <= -1:
        raise ValueError(f"edge translates satisfy -n <= ell <= -1, got ell={ell}, n={n}")
    weights = np.array(_alt_binomial(n + 1)[: -ell])
    poly = np.zeros((-ell, n))
    for r in range(-ell):
        for p in range(n):
            prod = 1.0
            for s in range(1, n - p):
                prod *= gamma - s
            poly[r, p] = (
                (-1.0) ** (n - p)
                * float(-ell - r) ** (n - 1 - p)
                / math.factorial(n - 1 - p)
                * prod
            )
    # tail: expand (v - u)^{-g} about u = 0 against the moments of B'_n
    tail = np.zeros(tail_terms + 1)
    rising = 1.0  # gamma (gamma+1) ... (gamma+q-1) / q!
    for q in range(tail_terms + 1):
        if q > 0:
            rising *= (gamma + q - 1) / q
        tail[q] = rising * _edge_prime_moment(n, ell, q)
    tail /= math.gamma(1.0 - gamma)
    return EdgeExpansion(
        n=n,
        ell=ell,
        gamma=gamma,
        weights=weights,
        poly=poly,
        tail=tail,
        inv_gamma_top=1.0 / math.gamma(n + 1.0 - gamma),
    )


def caputo_interior(n: int, gamma: float, ell: int, t):
    """Caputo derivative of the interior translate B_{n,ell}, ell >= 0.

    Returns (1/Gamma(n+1-g)) sum_r (-1)^r C(n+1,r) (t-ell-r)_+^{n-g};
    identically 0 for t <= ell.
    """
    _check_smoothness(n)
    _check_order(gamma)
    if ell < 0:
        raise ValueError(f"interior translates require ell >= 0, got {ell}")
    arr, scalar = _asfloat(t)
    out = _dcaputo_interior(n, gamma, arr - ell)
    return float(out) if scalar else out


def caputo_edge(n: int, gamma: float, ell: int, t):
    """Caputo derivative of the left-edge translate B_{n,ell}, -n <= ell <= -1.

    The interior-style backward difference minus the boundary correction
    of :class:`EdgeExpansion`; vanishes at t = 0.
    """
    table = edge_expansion(n, ell, gamma)
    arr, scalar = _asfloat(t)
    v = arr - ell
    out = np.zeros_like(v)
    cut = float(n + _FAR_CUTOVER_OFFSET)
    near = (arr > 0.0) & (v < cut)
    far = v >= cut
    if near.any():
        out[near] = _delta_frac_near(n, gamma, v[near]) * table.inv_gamma_top - table.correction(
            arr[near]
        )
    if far.any():
        out[far] = _delta_frac_far(n, gamma, v[far]) * table.inv_gamma_top - table.correction_tail(
            v[far]
        )
    return float(out) if scalar else out


def caputo_basis(idx: BasisIndex, gamma: float, t):
    """Caputo derivative of order gamma of the level-j basis function phi_{j,ell}.

    Dilation contributes a factor 2^{gamma j} on top of the L2
    normalisation 2^{j/2}:

        D^g phi_{j,ell}(t) = 2^{j/2} 2^{g j} (D^g B_{n,ell})(2^j t).

    gamma = 1 routes to the exact ordinary derivative, since the
    fractional formulas degenerate there (1/Gamma(1-g) pole).
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"order must lie in (0, 1], got {gamma}")
    arr, scalar = _asfloat(t)
    if np.any(arr < 0.0):
        raise ValueError("basis functions are defined on t >= 0")
    u = np.ldexp(arr, idx.j)
    if gamma == 1.0:
        out = 2.0 ** (idx.j / 2.0) * float(2**idx.j) * bspline_derivative(idx.n, u - idx.ell)
    else:
        _check_smoothness(idx.n)
        scale = 2.0 ** (idx.j / 2.0) * 2.0 ** (gamma * idx.j)
        if idx.ell >= 0:
            out = scale * _dcaputo_interior(idx.n, gamma, u - idx.ell)
        else:
            out = scale * caputo_edge(idx.n, gamma, idx.ell, u)
    return float(out) if scalar else out


def caputo_quadrature(f_prime, gamma: float, t: float, tol: float = 1e-10, breakpoints=()) -> float:
    """Caputo derivative (1/Gamma(1-g)) int_0^t f'(tau) (t-tau)^{-g} dtau by quadrature.

    The weak singularity at tau = t is removed by the substitution
    tau = t - u^{1/(1-g)}, after which an adaptive Gauss-Kronrod rule is
    applied.  Known kink locations of f' may be passed as
    ``breakpoints`` (in tau) to guide the subdivision.

    Serves as the independent oracle for the closed forms above; raises
    :class:`NumericsError` when the error estimate exceeds ``tol``.
    """
    _check_order(gamma)
    if t <= 0.0:
        return 0.0
    q = 1.0 / (1.0 - gamma)
    upper = t ** (1.0 - gamma)
    points = sorted({(t - b) ** (1.0 - gamma) for b in breakpoints if 0.0 < b < t})
    prefactor = 1.0 / math.gamma(2.0 - gamma)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, estimate = quad(
            lambda u: f_prime(t - u**q),
            0.0,
            upper,
            points=points or None,
            limit=200,
            epsabs=0.5 * tol / prefactor,
            epsrel=1e-13,
        )
    if estimate * prefactor > tol:
        raise NumericsError(
            f"Caputo quadrature did not reach tol={tol:g} "
            f"(estimated error {estimate * prefactor:g})"
        )
    return prefactor * value


def caputo_of_power(p: float, gamma: float, t):
    """Caputo derivative of t**p for p >= 1: Gamma(p+1)/Gamma(p+1-g) * t^{p-g}.

    Valid for 0 < gamma <= 1; at gamma = 1 it reduces to the ordinary
    derivative p t^{p-1}.
    """
    if p < 1.0:
        raise ValueError(f"power must satisfy p >= 1, got {p}")
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"order must lie in (0, 1], got {gamma}")
    arr, scalar = _asfloat(t)
    factor = math.gamma(p + 1.0) / math.gamma(p + 1.0 - gamma)
    if p == gamma:  # only p = gamma = 1: the constant derivative of t
        out = factor * np.ones_like(arr)
    else:
        out = factor * np.where(arr > 0.0, np.maximum(arr, 0.0) ** (p - gamma), 0.0)
    return float(out) if scalar else out
