"""Expected-length lower bound under consistent model-selection tuning.

With eta_n -> 0 and sqrt(n) eta_n -> infinity, take theta_n = sigma eta_n / 2.
Any interval that contains the estimate whenever the estimate is 0 and has
coverage 1 - alpha satisfies

    E(length) / E(length of standard interval)
        >= (1 - alpha - P(A_n^c)) sqrt(n) eta_n / (4 t(n - 1) E(R))

where A_n = {|X_n| <= R sqrt(n) eta_n} and X_n ~ N(sqrt(n) eta_n / 2, 1).
All quantities are in scaled coordinates, so sigma never enters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

from scipy import special, stats

from .models import QuadratureConfig, Theorem1Row
from .numerics import (
    DomainError,
    chi_scaled_bounds,
    chi_scaled_density,
    chi_scaled_mean,
    integrate,
    two_sided_t_quantile,
)


DEFAULT_GAMMA = 0.25
DEFAULT_N_VALUES: Tuple[int, ...] = tuple(10**power for power in range(2, 9))


@dataclass(frozen=True)
class Theorem1Schedule:
    """Sample sizes with eta_n = n^(-gamma), 0 < gamma < 1/2."""

    n_values: Tuple[int, ...]
    gamma: float = DEFAULT_GAMMA
    alpha: float = 0.05

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if not self.n_values:
            raise DomainError("Schedule needs at least one sample size")
        if any(n < 2 for n in self.n_values):
            raise DomainError("Sample sizes must be >= 2")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise DomainError("Sample sizes must be strictly increasing")
        if not 0.0 < self.gamma < 0.5:
            raise DomainError(f"gamma must lie in (0, 1/2), got {self.gamma}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")

    @classmethod
    def default(cls) -> "Theorem1Schedule":
        return cls(n_values=DEFAULT_N_VALUES)

    @property
    def eta_rule(self) -> str:
        return f"eta_n = n^(-{self.gamma:g})"

    def eta(self, n: int) -> float:
        return float(n) ** (-self.gamma)

    def tau(self, n: int) -> float:
        """sqrt(n) * eta_n."""
        return math.sqrt(n) * self.eta(n)

    def scaled_theta(self, n: int) -> float:
        """theta_n in scaled coordinates, sqrt(n) theta_n / sigma."""
        return 0.5 * self.tau(n)

    def limits_hold(self) -> bool:
        """eta_n falls and sqrt(n) eta_n grows between the schedule endpoints."""
        first, last = self.n_values[0], self.n_values[-1]
        if first == last:
            return True
        return self.eta(last) < self.eta(first) and self.tau(last) > self.tau(first)


def _check(n: int, eta: float) -> float:
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise DomainError(f"Sample size must be an integer >= 2, got {n}")
    if not eta > 0:
        raise DomainError(f"eta must be > 0, got {eta}")
    return math.sqrt(n) * eta


def prob_a_complement(n: int, eta: float, cfg: QuadratureConfig | None = None) -> float:
    """P(|X_n| > R sqrt(n) eta) at theta_n, integrated over the law of R."""
    s = _check(n, eta)
    r_lo, r_hi = chi_scaled_bounds(n)

    def integrand(r: float) -> float:
        tails = special.ndtr(-r * s - 0.5 * s) + special.ndtr(-r * s + 0.5 * s)
        return float(tails) * chi_scaled_density(n, r)

    return min(1.0, max(0.0, integrate(integrand, r_lo, r_hi, cfg)))


def prob_a_lemma_bound(n: int, eta: float) -> float:
    """P(R > 3/4) P(|X_n - s/2| <= s/4), a closed-form lower bound on P(A_n)."""
    s = _check(n, eta)
    k = int(n) - 1
    r_above = float(stats.chi2.sf(k * 9.0 / 16.0, k))
    x_near = 2.0 * float(special.ndtr(0.25 * s)) - 1.0
    return r_above * x_near


def theorem1_lower_bound(
    n: int, eta: float, alpha: float, cfg: QuadratureConfig | None = None
) -> float:
    s = _check(n, eta)
    p_complement = prob_a_complement(n, eta, cfg)
    mass = 1.0 - alpha - p_complement
    if mass <= 0.0:
        return 0.0
    return mass * s / (4.0 * two_sided_t_quantile(int(n) - 1, alpha) * chi_scaled_mean(n))


def theorem1_table(
    schedule: Theorem1Schedule, cfg: QuadratureConfig | None = None
) -> List[Theorem1Row]:
    rows: List[Theorem1Row] = []
    for n in schedule.n_values:
        eta = schedule.eta(n)
        rows.append(
            Theorem1Row(
                n=n,
                eta=eta,
                sqrt_n_eta=schedule.tau(n),
                p_a_complement=prob_a_complement(n, eta, cfg),
                lower_bound=theorem1_lower_bound(n, eta, schedule.alpha, cfg),
            )
        )
    return rows
