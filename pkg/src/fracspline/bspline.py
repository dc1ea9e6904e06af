"""Cardinal B-splines, their dyadic dilates, and the finite basis on [0, T].

The degree-n cardinal B-spline is built from truncated powers,

    B_n(t) = (1/n!) * sum_{r=0}^{n+1} (-1)^r C(n+1, r) (t - r)_+^n,

which keeps a single evaluation path for integer and fractional
exponents.  All evaluators accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "BasisIndex",
    "ActiveBasis",
    "truncated_power",
    "bspline_eval",
    "bspline_derivative",
    "basis_eval",
    "active_basis",
    "refinement_mask",
]


def _asfloat(t):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def truncated_power(t, p: float):
    """(max(0, t))**p, taken as 0 at t = 0 for every p >= 0.

    The p = 0 case is the indicator of t > 0; defining the value at the
    origin as 0 keeps B_n(0) = 0 for all degrees and sidesteps 0**0.
    """
    if p < 0:
        raise ValueError(f"exponent must be non-negative, got {p}")
    arr, scalar = _asfloat(t)
    out = np.where(arr > 0.0, np.power(np.maximum(arr, 0.0), p), 0.0)
    return float(out) if scalar else out


def _check_degree(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError(f"spline degree must be a non-negative integer, got {n!r}")


@lru_cache(maxsize=None)
def _alt_binomial(m: int) -> tuple:
    """Signed binomial row (-1)^r C(m, r), r = 0..m."""
    return tuple((-1.0) ** r * math.comb(m, r) for r in range(m + 1))


def bspline_eval(n: int, t):
    """Value of the cardinal B-spline B_n at t.

    B_n is supported on [0, n+1]; the returned value is exactly 0 for
    t <= 0 and for t >= n+1 (degree 0 is the right-closed box on (0, 1]).
    """
    _check_degree(n)
    arr, scalar = _asfloat(t)
    coeff = _alt_binomial(n + 1)
    acc = np.zeros_like(arr)
    inside = (arr > 0.0) & (arr < n + 1.0) if n >= 1 else (arr > 0.0) & (arr <= 1.0)
    if inside.any():
        sub = arr[inside]
        val = np.zeros_like(sub)
        for r in range(n + 2):
            shifted = sub - r
            val += coeff[r] * np.where(shifted > 0.0, np.maximum(shifted, 0.0) ** n, 0.0)
        acc[inside] = val / math.factorial(n)
    return float(acc) if scalar else acc


def bspline_derivative(n: int, t):
    """First derivative of B_n; equals B_{n-1}(t) - B_{n-1}(t-1) for n >= 1."""
    _check_degree(n)
    if n < 1:
        raise ValueError("the degree-0 B-spline has no classical derivative")
    arr, scalar = _asfloat(t)
    coeff = _alt_binomial(n + 1)
    acc = np.zeros_like(arr)
    inside = (arr > 0.0) & (arr < n + 1.0)
    if inside.any():
        sub = arr[inside]
        val = np.zeros_like(sub)
        for r in range(n + 2):
            shifted = sub - r
            val += coeff[r] * np.where(shifted > 0.0, np.maximum(shifted, 0.0) ** (n - 1), 0.0)
        acc[inside] = val / math.factorial(n - 1)
    return float(acc) if scalar else acc


@dataclass(frozen=True)
class BasisIndex:
    """One basis function 2^{j/2} B_n(2^j t - ell) of the level-j spline space."""

    n: int
    j: int
    ell: int

    def __post_init__(self):
        _check_degree(self.n)
        if self.j < 0:
            raise ValueError(f"dilation level must be >= 0, got {self.j}")
        if self.ell < -self.n:
            raise ValueError(f"translate must satisfy ell >= -n, got ell={self.ell}, n={self.n}")

    @property
    def is_edge(self) -> bool:
        """True for the left-edge functions -n <= ell <= -1 clipped at t = 0."""
        return self.ell < 0

    @property
    def support(self) -> tuple[float, float]:
        """Support interval on [0, inf)."""
        scale = float(2**self.j)
        return (max(0.0, self.ell / scale), (self.ell + self.n + 1) / scale)


def basis_eval(idx: BasisIndex, t):
    """Evaluate the dilated translate 2^{j/2} B_n(2^j t - ell) for t >= 0."""
    arr, scalar = _asfloat(t)
    if np.any(arr < 0.0):
        raise ValueError("basis functions are defined on t >= 0")
    out = 2.0 ** (idx.j / 2.0) * bspline_eval(idx.n, np.ldexp(arr, idx.j) - idx.ell)
    return float(out) if scalar else out


@dataclass(frozen=True)
class ActiveBasis:
    """The translates whose support meets [0, T] at level j: ell = -n .. 2^j T - 1."""

    n: int
    j: int
    horizon: int
    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)

    def basis_indices(self):
        for ell in self.indices:
            yield BasisIndex(self.n, self.j, ell)


def active_basis(n: int, j: int, horizon: int) -> ActiveBasis:
    """Enumerate the finite level-j basis on [0, T]; count is 2^j T + n."""
    _check_degree(n)
    if j < 0:
        raise ValueError(f"level must be >= 0, got {j}")
    if not isinstance(horizon, (int, np.integer)) or horizon <= 0:
        raise ValueError(f"horizon must be a positive integer, got {horizon!r}")
    last = (1 << j) * int(horizon) - 1
    return ActiveBasis(n, j, int(horizon), tuple(range(-n, last + 1)))


def refinement_mask(n: int) -> list[float]:
    """Two-scale coefficients a_k = 2^{-n} C(n+1, k) with B_n(t) = sum_k a_k B_n(2t - k)."""
    _check_degree(n)
    return [math.comb(n + 1, k) / float(2**n) for k in range(n + 2)]
