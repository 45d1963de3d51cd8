"""Shared numerical kernels.

Adaptive quadrature on semi-infinite intervals, the upper incomplete gamma
function for arbitrary real order, the Gaussian tail probability, and
finite-difference derivatives with Richardson extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, special

from .errors import DomainError, NonConvergent

__all__ = [
    "QuadratureSpec",
    "SeriesSpec",
    "integrate_semi_infinite",
    "upper_incomplete_gamma",
    "gaussian_q",
    "nth_derivative",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Evaluation policy for integrals over [lower, inf)."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    tail_cutoff: float = 1e-14

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class SeriesSpec:
    """Truncation policy for infinite series: keep at most max_terms,
    stop early once a term is negligible against the partial sum."""

    max_terms: int = 10
    convergence_tol: float = 1e-10

    def __post_init__(self):
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()
DEFAULT_SERIES = SeriesSpec()


def integrate_semi_infinite(f, lower, spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """Integrate f over [lower, inf).

    The half-line is mapped onto [0, 1) by t = lower + c u/(1-u) and the
    transformed integrand is fed to an adaptive Gauss-Kronrod rule.  The
    map scale c tracks the lower limit so integrands whose natural length
    scale grows with the limit are not crammed against u = 1.
    """
    scale = max(abs(lower), 1.0)

    def g(u):
        if u >= 1.0:
            return 0.0
        w = scale / (1.0 - u)
        val = f(lower + u * w) * w / (1.0 - u)
        if not math.isfinite(val):
            raise DomainError(f"integrand returned non-finite value near u={u!r}")
        return val

    with np.errstate(over="ignore", invalid="ignore"):
        value, abserr, info = integrate.quad(
            g,
            0.0,
            1.0,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            full_output=True,
        )[:3]
    if info["last"] >= spec.max_subdivisions and abserr > max(
        spec.rel_tol * abs(value), spec.abs_tol
    ):
        raise NonConvergent(
            f"subdivision budget {spec.max_subdivisions} exhausted "
            f"(estimate {value:g}, error {abserr:g})"
        )
    return value


def upper_incomplete_gamma(a, y):
    """Upper incomplete gamma Gamma(a, y) = int_y^inf t^(a-1) e^(-t) dt.

    Supports any real order for y > 0; for y = 0 the integral only exists
    for a > 0.  Negative orders (including negative integers) are computed
    at elevated precision, since float64 recurrences cancel badly once the
    order drops far below zero.
    """
    if y < 0:
        raise DomainError("upper_incomplete_gamma requires y >= 0")
    if y == 0.0:
        if a <= 0:
            raise DomainError("Gamma(a, 0) diverges for a <= 0")
        return float(special.gamma(a))
    if a > 0:
        return float(special.gammaincc(a, y) * special.gamma(a))
    if a == 0.0:
        return float(special.exp1(y))
    with mpmath.workdps(40):
        return float(mpmath.gammainc(a, y, mpmath.inf))


def gaussian_q(x):
    """Standard normal upper-tail probability Q(x)."""
    return float(special.ndtr(-np.asarray(x, dtype=float)))


_FD_MIN_STEP = 1e-12


def nth_derivative(f, s, n, step_hint=None, full_output=False):
    """n-th derivative of f at s via central differences.

    Three step sizes (h, h/2, h/4) feed one level of Richardson
    extrapolation; the spread between the two extrapolants is returned as
    the error estimate when full_output is set.
    """
    if n < 0:
        raise DomainError("derivative order must be non-negative")
    if n == 0:
        val = f(s)
        return (val, 0.0) if full_output else val
    if step_hint is None:
        step_hint = max(abs(s), 1.0) * 1e-2
    h = max(abs(step_hint), _FD_MIN_STEP)

    coeffs = [(-1.0) ** k * math.comb(n, k) for k in range(n + 1)]

    def central(step):
        acc = 0.0
        for k, c in enumerate(coeffs):
            val = f(s + (n / 2.0 - k) * step)
            if not math.isfinite(val):
                raise DomainError(f"f non-finite at stencil point {s + (n / 2.0 - k) * step!r}")
            acc += c * val
        return acc / step**n

    d_h, d_h2, d_h4 = central(h), central(h / 2.0), central(h / 4.0)
    # Central differences have O(h^2) error, so the extrapolation weight is 4/3.
    r1 = (4.0 * d_h2 - d_h) / 3.0
    r2 = (4.0 * d_h4 - d_h2) / 3.0
    spread = abs(r2 - r1) / max(abs(r2), 1e-300)
    if full_output:
        return r2, spread
    return r2
