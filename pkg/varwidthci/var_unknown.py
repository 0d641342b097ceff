"""Unknown-variance interval D* = [-R b(-X/R), R b(X/R)].

X ~ N(psi, 1) and R = S / sigma are independent, with (n - 1) R^2 chi-squared
on n - 1 degrees of freedom. Conditioning on R = r turns D* into the
known-variance computation with b replaced by x -> r b(x / r):

    P(psi in D* | R = r) = Phi(-r u(-psi/r) - psi) - Phi(r u(psi/r) - psi)
    E(length of D* | R = r) = 2 z r + r * E(s(X') ),  X' ~ N(psi / r, 1 / r^2)

where u = b^{-1} and s(x) = e(x) + e(-x). The outer integral over r is
truncated where f_R leaves less than 1e-12 of mass. Nothing here depends on
sigma or theta separately.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, List

import numpy as np
from scipy import special

from .interval import (
    BFunction,
    coverage_known,
    inverse_from_excess,
    mean_excess_length,
    piecewise_linear_gaussian_integral,
)
from .models import EfficiencyCurve, EfficiencyRecord, QuadratureConfig, Theorem2Row
from .numerics import (
    R_TAIL_MASS,
    ConvergenceError,
    chi_scaled_bounds,
    chi_scaled_density,
    chi_scaled_mean,
    integrate,
    two_sided_t_quantile,
)


logger = logging.getLogger(__name__)

SECOND_MOMENT_TOL = 1e-7


@dataclass(frozen=True)
class RDistribution:
    n: int
    tail_mass: float = R_TAIL_MASS

    def __post_init__(self) -> None:
        # validates n through the bounds computation
        chi_scaled_bounds(self.n, self.tail_mass)

    @property
    def dof(self) -> int:
        return self.n - 1

    def density(self, r):
        return chi_scaled_density(self.n, r)

    def bounds(self) -> tuple[float, float]:
        return chi_scaled_bounds(self.n, self.tail_mass)

    def mean(self) -> float:
        return chi_scaled_mean(self.n)

    def moment(self, power: float, cfg: QuadratureConfig | None = None) -> float:
        """E(R^power) by quadrature over the truncated support."""
        r_lo, r_hi = self.bounds()
        return integrate(lambda r: r**power * chi_scaled_density(self.n, r), r_lo, r_hi, cfg)


@dataclass(frozen=True)
class UnknownVarContext:
    n: int
    bf: BFunction
    r_dist: RDistribution
    t_quantile: float = field(init=False)
    r_mean: float = field(init=False)

    def __post_init__(self) -> None:
        if self.r_dist.n != self.n:
            raise ValueError(f"RDistribution is for n={self.r_dist.n}, context for n={self.n}")
        second = self.r_dist.moment(2.0)
        if abs(second - 1.0) > SECOND_MOMENT_TOL:
            raise ConvergenceError(
                f"E(R^2) = {second!r} for n={self.n}, expected 1",
                estimate=second,
                abs_error=abs(second - 1.0),
            )
        object.__setattr__(self, "t_quantile", two_sided_t_quantile(self.n - 1, self.bf.alpha))
        object.__setattr__(self, "r_mean", self.r_dist.mean())

    @property
    def reference_length(self) -> float:
        """E(length of J*) = 2 t(n - 1) E(R)."""
        return 2.0 * self.t_quantile * self.r_mean


def make_context(bf: BFunction, n: int) -> UnknownVarContext:
    return UnknownVarContext(n=n, bf=bf, r_dist=RDistribution(n))


def _coverage_kinks(bf: BFunction, psi: float, r_lo: float, r_hi: float) -> np.ndarray:
    """Values of r where psi / r or -psi / r crosses a kink of b^{-1}."""
    if psi == 0.0:
        return np.array([r_lo, r_hi])
    b_knots = bf.knot_array + bf.z + bf.e_array
    b_knots = b_knots[b_knots != 0.0]
    candidates = np.concatenate([psi / b_knots, -psi / b_knots])
    inside = candidates[(candidates > r_lo) & (candidates < r_hi)]
    return np.unique(np.concatenate([[r_lo, r_hi], inside]))


def conditional_coverage(bf: BFunction, psi: float, r) -> float | np.ndarray:
    """P(psi in D* | R = r)."""
    r_arr = np.asarray(r, dtype=float)
    knots, e, z = bf.knot_array, bf.e_array, bf.z
    upper = -r_arr * inverse_from_excess(knots, e, z, -psi / r_arr)
    lower = r_arr * inverse_from_excess(knots, e, z, psi / r_arr)
    values = special.ndtr(upper - psi) - special.ndtr(lower - psi)
    return float(values) if np.ndim(r) == 0 else values


def coverage_unknown(ctx: UnknownVarContext, psi: float, cfg: QuadratureConfig | None = None) -> float:
    r_lo, r_hi = ctx.r_dist.bounds()
    nodes = _coverage_kinks(ctx.bf, float(psi), r_lo, r_hi)

    def integrand(r: float) -> float:
        return conditional_coverage(ctx.bf, psi, r) * chi_scaled_density(ctx.n, r)

    return sum(integrate(integrand, float(a), float(b), cfg) for a, b in zip(nodes[:-1], nodes[1:]))


def conditional_excess_length(bf: BFunction, psi: float, r: float) -> float:
    """E(length of D* | R = r) - 2 z r."""
    nodes, values = bf.symmetric_excess()
    return r * float(piecewise_linear_gaussian_integral(nodes, values, psi / r, 1.0 / r)[0])


def expected_length_unknown(
    ctx: UnknownVarContext, psi: float, cfg: QuadratureConfig | None = None
) -> float:
    r_lo, r_hi = ctx.r_dist.bounds()
    psi = float(psi)

    def integrand(r: float) -> float:
        return conditional_excess_length(ctx.bf, psi, r) * chi_scaled_density(ctx.n, r)

    return 2.0 * ctx.bf.z * ctx.r_mean + integrate(integrand, r_lo, r_hi, cfg)


def expected_length_standard_unknown(
    ctx: UnknownVarContext, cfg: QuadratureConfig | None = None
) -> float:
    """E(length of J*) = 2 t(n - 1) E(R), with E(R) by quadrature."""
    return 2.0 * ctx.t_quantile * ctx.r_dist.moment(1.0, cfg)


def efficiency_unknown(
    ctx: UnknownVarContext, psi_grid: Iterable[float], cfg: QuadratureConfig | None = None
) -> EfficiencyCurve:
    reference = ctx.reference_length
    records: List[EfficiencyRecord] = []
    for psi in psi_grid:
        psi = float(psi)
        length = expected_length_unknown(ctx, psi, cfg)
        records.append(
            EfficiencyRecord(
                psi=psi,
                coverage=coverage_unknown(ctx, psi, cfg),
                expected_length=length,
                efficiency=(length / reference) ** 2,
            )
        )
    if not records:
        raise ValueError("psi_grid must not be empty")
    return EfficiencyCurve(reference_length=reference, records=records)


def theorem2_diagnostics(
    bf: BFunction,
    n_list: Iterable[int],
    psi_grid: Iterable[float],
    cfg: QuadratureConfig | None = None,
) -> List[Theorem2Row]:
    """Sup over psi of the coverage gap and of the normalised length gap, per n."""
    grid = np.asarray(list(psi_grid), dtype=float)
    if grid.size == 0:
        raise ValueError("psi_grid must not be empty")
    known_coverage = np.atleast_1d(coverage_known(bf, grid))
    known_ratio = 1.0 + np.atleast_1d(mean_excess_length(bf, grid)) / (2.0 * bf.z)

    rows: List[Theorem2Row] = []
    for n in sorted(set(int(n) for n in n_list)):
        ctx = make_context(bf, n)
        unknown_coverage = np.array([coverage_unknown(ctx, psi, cfg) for psi in grid])
        unknown_ratio = np.array([expected_length_unknown(ctx, psi, cfg) for psi in grid])
        unknown_ratio /= ctx.reference_length
        row = Theorem2Row(
            n=n,
            sup_coverage_diff=float(np.max(np.abs(known_coverage - unknown_coverage))),
            sup_length_diff=float(np.max(np.abs(known_ratio - unknown_ratio))),
        )
        logger.info(
            "n=%d: sup coverage diff %.3e, sup length diff %.3e",
            n,
            row.sup_coverage_diff,
            row.sup_length_diff,
        )
        rows.append(row)
    return rows
