"""Independent oracles used across the test suite.

Everything here deliberately avoids the library's own evaluation paths:
the B-spline oracle is the classical knot recursion, the special-function
oracles run in extended precision via mpmath.
"""

import mpmath

mpmath.mp.dps = 60


def cox_de_boor(n: int, t: float) -> float:
    """Cardinal B-spline of degree n by the knot recursion on {0, ..., n+1}."""

    def basis(i: int, k: int, x: float) -> float:
        if k == 0:
            return 1.0 if i <= x < i + 1 else 0.0
        left = (x - i) / k * basis(i, k - 1, x)
        right = (i + k + 1 - x) / k * basis(i + 1, k - 1, x)
        return left + right

    return basis(0, n, t)


def mp_ml(gamma: float, z: float, beta: float = 1.0, terms: int = 200) -> float:
    """Partial sum of the Mittag-Leffler series in 60-digit arithmetic.

    Only valid where the series is benign; for strongly alternating
    cases use :func:`mp_ml_neg`.
    """
    g = +mpmath.mpf(gamma)
    b = +mpmath.mpf(beta)
    zz = +mpmath.mpf(z)
    total = mpmath.mpf(0)
    for k in range(terms):
        total += zz**k / mpmath.gamma(g * k + b)
    return float(total)


def mp_ml_neg(gamma: float, x: float, beta: float = 1.0) -> float:
    """E_{gamma,beta}(-x) for x > 0 by Talbot-contour Laplace inversion.

    t^{beta-1} E_{gamma,beta}(-x t^gamma) has Laplace transform
    s^{gamma-beta} / (s^gamma + x); evaluating the inverse at t = 1 is a
    route entirely independent of both the series and the branch-cut
    integral used by the library.
    """
    g = +mpmath.mpf(gamma)
    b = +mpmath.mpf(beta)
    lam = +mpmath.mpf(x)
    transform = lambda s: s ** (g - b) / (s**g + lam)
    return float(mpmath.invertlaplace(transform, 1.0, method="talbot", degree=40))


def mp_caputo_interior(n: int, gamma: float, ell: int, t: float) -> float:
    """Interior closed form evaluated in extended precision."""
    g = +mpmath.mpf(gamma)
    tt = +mpmath.mpf(t)
    total = mpmath.mpf(0)
    for r in range(n + 2):
        arg = tt - ell - r
        if arg > 0:
            total += mpmath.mpf(-1) ** r * mpmath.binomial(n + 1, r) * arg ** (n - g)
    return float(total / mpmath.gamma(n + 1 - g))


def mp_caputo_edge(n: int, gamma: float, ell: int, t: float) -> float:
    """Edge closed form (difference part minus boundary correction) in extended precision."""
    g = +mpmath.mpf(gamma)
    tt = +mpmath.mpf(t)
    if tt <= 0:
        return 0.0
    delta = mpmath.mpf(0)
    for r in range(n + 2):
        arg = tt - ell - r
        if arg > 0:
            delta += mpmath.mpf(-1) ** r * mpmath.binomial(n + 1, r) * arg ** (n - g)
    corr = mpmath.mpf(0)
    for r in range(0, -ell):
        a = tt - ell - r
        inner = mpmath.mpf(0)
        for p in range(0, n):
            prod = mpmath.mpf(1)
            for s in range(1, n - p):
                prod *= g - s
            inner += (
                mpmath.mpf(-1) ** (n - p)
                * mpmath.mpf(-ell - r) ** (n - 1 - p)
                * a**p
                / mpmath.factorial(n - 1 - p)
                * prod
            )
        corr += mpmath.mpf(-1) ** r * mpmath.binomial(n + 1, r) * (a ** (n - g) + tt ** (1 - g) * inner)
    return float((delta - corr) / mpmath.gamma(n + 1 - g))
