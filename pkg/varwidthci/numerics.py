"""Special functions, quadrature and root finding shared by the other modules.

The normal, Student t and scaled-chi functions are thin, validated wrappers
around ``scipy.special`` / ``scipy.stats``. All functions are pure.
"""
from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize, special, stats

from .models import QuadratureConfig


logger = logging.getLogger(__name__)

# |x - psi| beyond which the Gaussian factor is below 1e-16.
GAUSSIAN_CUTOFF = 8.3

# Mass left outside [r_lo, r_hi] on each side when truncating R integrals.
R_TAIL_MASS = 5e-13

_ROOT_RTOL = 4.0 * np.finfo(float).eps


class DomainError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, estimate: float, abs_error: float) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.abs_error = abs_error


def _as_output(values: np.ndarray, like) -> float | np.ndarray:
    if np.ndim(like) == 0:
        return float(values)
    return values


def std_normal_cdf(x):
    return _as_output(special.ndtr(np.asarray(x, dtype=float)), x)


def std_normal_pdf(x):
    arr = np.asarray(x, dtype=float)
    return _as_output(stats.norm.pdf(arr), x)


def std_normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"Probability must lie in (0, 1), got {p}")
    return float(special.ndtri(p))


def two_sided_normal_quantile(alpha: float) -> float:
    """z with P(-z <= Z <= z) = 1 - alpha."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return std_normal_quantile(1.0 - alpha / 2.0)


def _check_dof(m) -> int:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise DomainError(f"Degrees of freedom must be an integer >= 1, got {m}")
    return int(m)


def student_t_cdf(m: int, t: float) -> float:
    """t-distribution CDF through the regularised incomplete beta function."""
    m = _check_dof(m)
    if t == 0.0:
        return 0.5
    # I_{t^2/(m+t^2)}(1/2, m/2) keeps precision for large m.
    half_mass = 0.5 * float(special.betainc(0.5, 0.5 * m, t * t / (m + t * t)))
    return 0.5 + half_mass if t > 0 else 0.5 - half_mass


def student_t_quantile(m: int, p: float) -> float:
    m = _check_dof(m)
    if not 0.0 < p < 1.0:
        raise DomainError(f"Probability must lie in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_quantile(m, 1.0 - p)

    hi = 2.0
    while student_t_cdf(m, hi) < p:
        hi *= 2.0
        if hi > 1e300:
            raise DomainError(f"Cannot bracket t quantile for m={m}, p={p}")
    return find_root_monotone(lambda t: student_t_cdf(m, t) - p, 0.0, hi, 1e-13)


def two_sided_t_quantile(m: int, alpha: float) -> float:
    """t(m) with P(-t(m) <= T <= t(m)) = 1 - alpha."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return student_t_quantile(m, 1.0 - alpha / 2.0)


def _check_sample_size(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise DomainError(f"Sample size must be an integer >= 2, got {n}")
    return int(n)


def chi_scaled_density(n: int, r):
    """Density of R = S/sigma, where (n - 1) R^2 is chi-squared with n - 1 dof."""
    k = _check_sample_size(n) - 1
    arr = np.asarray(r, dtype=float)
    scale = math.sqrt(k)
    density = np.where(arr > 0, scale * stats.chi.pdf(scale * np.abs(arr), k), 0.0)
    return _as_output(density, r)


def chi_scaled_mean(n: int) -> float:
    """E(R) = sqrt(2/k) Gamma((k+1)/2) / Gamma(k/2), k = n - 1."""
    k = _check_sample_size(n) - 1
    return math.sqrt(2.0 / k) * float(special.poch(0.5 * k, 0.5))


def chi_scaled_bounds(n: int, tail_mass: float = R_TAIL_MASS) -> tuple[float, float]:
    """[r_lo, r_hi] leaving at most ``tail_mass`` of R on each side."""
    k = _check_sample_size(n) - 1
    r_lo = math.sqrt(float(stats.chi2.ppf(tail_mass, k)) / k)
    r_hi = math.sqrt(float(stats.chi2.isf(tail_mass, k)) / k)
    return r_lo, r_hi


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    cfg: QuadratureConfig | None = None,
) -> float:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over [a, b]."""
    cfg = cfg or QuadratureConfig()
    if not a <= b:
        raise DomainError(f"Integration bounds must satisfy a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0

    result = _integrate.quad(
        f,
        a,
        b,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
        full_output=1,
    )
    value, abs_error = float(result[0]), float(result[1])
    if len(result) > 3:
        raise ConvergenceError(
            f"Quadrature on [{a}, {b}] did not converge: {result[3]}",
            estimate=value,
            abs_error=abs_error,
        )
    return value


def find_root_monotone(
    g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12
) -> float:
    """Root of an increasing function bracketed by g(lo) <= 0 <= g(hi)."""
    if not lo <= hi:
        raise DomainError(f"Invalid bracket [{lo}, {hi}]")
    g_lo = g(lo)
    g_hi = g(hi)
    if g_lo > 0 or g_hi < 0:
        raise DomainError(
            f"Bracket [{lo}, {hi}] does not straddle a root: g(lo)={g_lo}, g(hi)={g_hi}"
        )
    if g_lo == 0:
        return lo
    if g_hi == 0:
        return hi
    return float(optimize.brentq(g, lo, hi, xtol=tol, rtol=_ROOT_RTOL, maxiter=500))
