"""Construction of b for given (alpha, w) by constrained minimisation.

The excess e is parametrised by its values at the knots of a symmetric grid,
with e(x) = e(-x) imposed and e(-q) = e(q) = 0 fixed. The objective

    J(b) = (1 - w) * l(0) + w * int (l(psi) - 2z) g(psi) dpsi,   l = expected length

with g(psi) = exp(-psi^2 / (2 s^2)), or g = 1 when s = 0 (flat weight), is
linear in the knot values. Coverage at every psi of the constraint grid
enters as a smooth inequality constraint; slope bounds (strict increase of b,
Lipschitz bound L) and b(x) + b(-x) >= 0 are linear. SLSQP does the work.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .interval import (
    DEFAULT_KNOT_COUNT,
    DEFAULT_LIPSCHITZ,
    DEFAULT_Q,
    BFunction,
    BFunctionError,
    coverage_from_excess,
    inverse_from_excess,
    coverage_known,
    make_grid,
    piecewise_linear_gaussian_integral,
)
from .models import CoverageAudit, SolveLogEntry
from .numerics import std_normal_pdf, two_sided_normal_quantile
from .utils import arange_grid, refine_grid


logger = logging.getLogger(__name__)

AUDIT_TOL = 1e-3
CONSTRAINT_GRID_SPACING = 0.1
CONSTRAINT_GRID_MARGIN = 4.0
AUDIT_GRID_SPACING = 0.02
AUDIT_GRID_MARGIN = 9.0
# slope bounds are tightened by this much relative to what BFunction validates
SOLVER_SLOPE_MARGIN = 1e-6
# height of the tent-shaped excess the first round starts from
START_EXCESS = 0.05
MAX_RESTARTS = 3


class SolverError(RuntimeError):
    def __init__(self, message: str, log: Optional[List[SolveLogEntry]] = None) -> None:
        super().__init__(message)
        self.log = list(log or [])


@dataclass
class SolverConfig:
    w: float = 0.1
    alpha: float = 0.05
    q: float = DEFAULT_Q
    knot_count: int = DEFAULT_KNOT_COUNT
    psi_constraint_grid: Tuple[float, ...] = ()
    # 0 selects the flat weight g = 1
    spread_scale: float = 0.0
    max_iterations: int = 500
    constraint_tol: float = AUDIT_TOL
    lipschitz_L: float = DEFAULT_LIPSCHITZ
    max_refinements: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"w must lie in [0, 1], got {self.w}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.q > 0 or not self.lipschitz_L > 0:
            raise ValueError("q and lipschitz_L must be > 0")
        if not self.spread_scale >= 0:
            raise ValueError(f"spread_scale must be >= 0, got {self.spread_scale}")
        if self.knot_count < 3:
            raise ValueError("knot_count must be >= 3")
        if self.max_iterations < 1 or self.constraint_tol < 0 or self.max_refinements < 0:
            raise ValueError("max_iterations >= 1, constraint_tol >= 0, max_refinements >= 0")

        if not self.psi_constraint_grid:
            grid = arange_grid(0.0, self.q + CONSTRAINT_GRID_MARGIN, CONSTRAINT_GRID_SPACING)
            self.psi_constraint_grid = tuple(float(v) for v in grid)
        grid = np.sort(np.asarray(self.psi_constraint_grid, dtype=float))
        if grid[0] > 0.0 or grid[-1] < self.q + CONSTRAINT_GRID_MARGIN - 1e-12:
            raise ValueError(f"psi_constraint_grid must cover [0, {self.q + CONSTRAINT_GRID_MARGIN}]")
        if grid.size > 1 and np.max(np.diff(grid)) > CONSTRAINT_GRID_SPACING + 1e-9:
            raise ValueError(f"psi_constraint_grid spacing must be <= {CONSTRAINT_GRID_SPACING}")


@dataclass
class SolveResult:
    bfunction: BFunction
    audit: CoverageAudit
    rounds: int
    message: str
    log: List[SolveLogEntry] = field(default_factory=list)


def _symmetric_map(knot_count: int) -> np.ndarray:
    """Matrix taking free parameters (centre outwards) to all knot values."""
    start = math.ceil((knot_count - 1) / 2)
    free = list(range(start, knot_count - 1))
    mapping = np.zeros((knot_count, len(free)))
    for column, index in enumerate(free):
        mapping[index, column] = 1.0
        mapping[knot_count - 1 - index, column] = 1.0
    return mapping


def _hat_basis(knots: np.ndarray, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    count = knots.size
    index = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, count - 2)
    left = knots[index]
    t = (x - left) / (knots[index + 1] - left)
    inside = (x >= knots[0]) & (x <= knots[-1])
    basis = np.zeros((x.size, count))
    rows = np.arange(x.size)
    basis[rows, index] = np.where(inside, 1.0 - t, 0.0)
    basis[rows, index + 1] = np.where(inside, t, 0.0)
    return basis


def _slope_at(knots: np.ndarray, e: np.ndarray, x: np.ndarray) -> np.ndarray:
    index = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, knots.size - 2)
    slopes = np.diff(e) / np.diff(knots)
    inside = (x >= knots[0]) & (x <= knots[-1])
    return np.where(inside, slopes[index], 0.0)


def _spread_weights(knots: np.ndarray, spread_scale: float) -> np.ndarray:
    """int hat_k(x) (int phi(x - psi) g(psi) dpsi) dx for every knot k."""
    if spread_scale == 0.0 or math.isinf(spread_scale):
        # g = 1: the inner integral is 1, leaving the trapezoid weights
        widths = np.diff(knots)
        weights = np.zeros(knots.size)
        weights[:-1] += 0.5 * widths
        weights[1:] += 0.5 * widths
        return weights
    identity = np.eye(knots.size)
    spread = math.sqrt(1.0 + spread_scale**2)
    averaged = piecewise_linear_gaussian_integral(knots, identity, 0.0, spread)[0]
    return math.sqrt(2.0 * math.pi) * spread_scale * averaged


class _Problem:
    """Objective and constraints of one solve on a fixed constraint grid."""

    def __init__(self, cfg: SolverConfig, psi_grid: np.ndarray) -> None:
        self.cfg = cfg
        self.z = two_sided_normal_quantile(cfg.alpha)
        self.knots = make_grid(cfg.q, cfg.knot_count)
        self.mapping = _symmetric_map(cfg.knot_count)
        psi = np.asarray(psi_grid, dtype=float)
        # for psi >= q + z both endpoints invert b where e = 0: coverage is exactly 1 - alpha
        self.psi = psi[psi < cfg.q + self.z]
        self.target = 1.0 - cfg.alpha

        identity = np.eye(self.knots.size)
        at_zero = piecewise_linear_gaussian_integral(self.knots, identity, 0.0, 1.0)[0]
        # e(x) + e(-x) doubles each hat integral against an even weight
        weights = 2.0 * ((1.0 - cfg.w) * at_zero + cfg.w * _spread_weights(self.knots, cfg.spread_scale))
        self.gradient = self.mapping.T @ weights
        self.offset = (1.0 - cfg.w) * 2.0 * self.z

        difference = np.diff(np.eye(self.knots.size), axis=0) / np.diff(self.knots)[:, None]
        self.slope_matrix = difference @ self.mapping
        self.slope_floor = max(-cfg.lipschitz_L, -1.0 + SOLVER_SLOPE_MARGIN)
        self.slope_ceiling = cfg.lipschitz_L - SOLVER_SLOPE_MARGIN

    def excess(self, theta: np.ndarray) -> np.ndarray:
        return self.mapping @ theta

    def start(self) -> np.ndarray:
        """Tent e(x) = c (1 - |x|/q): coverage exceeds 1 - alpha wherever it depends on e."""
        reach = (self.mapping.T @ np.abs(self.knots)) / self.mapping.sum(axis=0)
        return START_EXCESS * (1.0 - reach / self.cfg.q)

    def objective(self, theta: np.ndarray) -> float:
        return float(self.offset + self.gradient @ theta)

    def objective_jac(self, theta: np.ndarray) -> np.ndarray:
        return self.gradient

    def coverage_slack(self, theta: np.ndarray) -> np.ndarray:
        return coverage_from_excess(self.knots, self.excess(theta), self.z, self.psi) - self.target

    def coverage_jac(self, theta: np.ndarray) -> np.ndarray:
        e = self.excess(theta)
        x_low = inverse_from_excess(self.knots, e, self.z, self.psi)
        reflected = inverse_from_excess(self.knots, e, self.z, -self.psi)
        low_weight = std_normal_pdf(x_low - self.psi) / (1.0 + _slope_at(self.knots, e, x_low))
        high_weight = std_normal_pdf(-reflected - self.psi) / (
            1.0 + _slope_at(self.knots, e, reflected)
        )
        low_basis = _hat_basis(self.knots, x_low) @ self.mapping
        high_basis = _hat_basis(self.knots, reflected) @ self.mapping
        return low_weight[:, None] * low_basis + high_weight[:, None] * high_basis

    def slope_slack(self, theta: np.ndarray) -> np.ndarray:
        slopes = self.slope_matrix @ theta
        return np.concatenate([slopes - self.slope_floor, self.slope_ceiling - slopes])

    def slope_jac(self, theta: np.ndarray) -> np.ndarray:
        return np.vstack([self.slope_matrix, -self.slope_matrix])

    def max_violation(self, theta: np.ndarray) -> float:
        worst = min(float(np.min(self.coverage_slack(theta))), float(np.min(self.slope_slack(theta))))
        return max(0.0, -worst)

    def constraints(self) -> List[dict]:
        return [
            {"type": "ineq", "fun": self.coverage_slack, "jac": self.coverage_jac},
            {"type": "ineq", "fun": self.slope_slack, "jac": self.slope_jac},
        ]

    def bounds(self) -> List[Tuple[float, Optional[float]]]:
        # e(x) + e(-x) = 2 e(x) >= -2z keeps the upper endpoint above the lower one
        return [(-self.z, self.cfg.lipschitz_L * self.cfg.q)] * self.mapping.shape[1]


def _run_slsqp(
    problem: _Problem,
    theta: np.ndarray,
    cfg: SolverConfig,
    round_index: int,
    entries: List[SolveLogEntry],
) -> Tuple[np.ndarray, str, int]:
    """SLSQP from ``theta``, restarted from the best feasible iterate while it improves.

    An infeasible final iterate is replaced by the best feasible one seen in
    the callback; the start counts when it is feasible.
    """
    iteration = [0]
    best: List[Optional[np.ndarray]] = [None]
    best_objective = [math.inf]

    def consider(xk: np.ndarray) -> float:
        violation = problem.max_violation(xk)
        objective = problem.objective(xk)
        if violation <= cfg.constraint_tol and objective < best_objective[0]:
            best[0] = np.array(xk, dtype=float)
            best_objective[0] = objective
        return violation

    def record(xk: np.ndarray) -> None:
        iteration[0] += 1
        violation = consider(xk)
        entries.append(
            SolveLogEntry(
                round=round_index,
                iteration=iteration[0],
                objective=problem.objective(xk),
                max_violation=violation,
            )
        )

    consider(theta)
    message = ""
    for _ in range(MAX_RESTARTS + 1):
        before = best_objective[0]
        result = optimize.minimize(
            problem.objective,
            theta,
            jac=problem.objective_jac,
            method="SLSQP",
            bounds=problem.bounds(),
            constraints=problem.constraints(),
            callback=record,
            options={"maxiter": cfg.max_iterations, "ftol": 1e-12},
        )
        message = str(result.message)
        theta = np.asarray(result.x, dtype=float)
        if consider(theta) > cfg.constraint_tol:
            if best[0] is None:
                return theta, message, iteration[0]
            logger.warning("SLSQP ended infeasible ('%s'); falling back to best feasible iterate", message)
            theta = best[0]
        elif not result.success:
            logger.warning("SLSQP reported '%s' at a feasible point; keeping it", message)
        if result.success or best_objective[0] >= before - 1e-12 * max(1.0, abs(before)):
            break
        theta = best[0]
    return theta, message, iteration[0]


def solve(cfg: SolverConfig, log: Callable[[str], None] | None = None) -> SolveResult:
    log = log or logger.info
    entries: List[SolveLogEntry] = []
    psi_grid = np.asarray(sorted(cfg.psi_constraint_grid), dtype=float)
    theta: Optional[np.ndarray] = None
    message = ""

    for round_index in range(1, cfg.max_refinements + 2):
        problem = _Problem(cfg, psi_grid)
        if theta is None:
            theta = problem.start()
        theta, message, iterations = _run_slsqp(problem, theta, cfg, round_index, entries)
        violation = problem.max_violation(theta)
        log(
            f"Round {round_index}: {iterations} iterations, objective {problem.objective(theta):.10g}, "
            f"max violation {violation:.3g} ({message})"
        )
        if violation > cfg.constraint_tol:
            raise SolverError(
                f"Solve round {round_index} ended infeasible (violation {violation:.3g}): {message}",
                entries,
            )

        audit_grid = refine_grid(psi_grid)
        slack = (
            coverage_from_excess(problem.knots, problem.excess(theta), problem.z, audit_grid)
            - problem.target
        )
        if float(np.min(slack)) >= -cfg.constraint_tol:
            break
        if round_index > cfg.max_refinements:
            raise SolverError(
                f"Coverage between constraint nodes still short by {-float(np.min(slack)):.3g} "
                f"after {cfg.max_refinements} refinements",
                entries,
            )
        log(f"Coverage dips to {float(np.min(slack)) + problem.target:.6f} between nodes; densifying grid")
        psi_grid = audit_grid

    e_values = problem.excess(theta)
    e_values[0] = 0.0
    e_values[-1] = 0.0
    try:
        bf = BFunction(
            alpha=cfg.alpha,
            q=cfg.q,
            knots=tuple(problem.knots),
            e_values=tuple(e_values),
            lipschitz_L=cfg.lipschitz_L,
            w=cfg.w,
        )
    except BFunctionError as exc:
        raise SolverError(f"Solved excess violates b-function invariants: {exc}", entries) from exc

    audit = audit_coverage(bf, cfg.alpha, default_audit_grid(bf))
    if not audit.passed:
        raise SolverError(
            f"Audit failed: minimum coverage {audit.min_coverage:.6f} at psi={audit.argmin_psi:.4f}",
            entries,
        )
    return SolveResult(bfunction=bf, audit=audit, rounds=round_index, message=message, log=entries)


def solve_b(cfg: SolverConfig) -> BFunction:
    return solve(cfg).bfunction


def default_audit_grid(bf: BFunction, spacing: float = AUDIT_GRID_SPACING) -> np.ndarray:
    return arange_grid(0.0, bf.q + AUDIT_GRID_MARGIN, spacing)


def audit_coverage(bf: BFunction, alpha: float, fine_grid: Sequence[float]) -> CoverageAudit:
    grid = np.asarray(fine_grid, dtype=float)
    coverage = coverage_known(bf, grid)
    worst = int(np.argmin(coverage))
    threshold = 1.0 - alpha - AUDIT_TOL
    return CoverageAudit(
        min_coverage=float(coverage[worst]),
        argmin_psi=float(grid[worst]),
        threshold=threshold,
        passed=bool(coverage[worst] >= threshold),
    )
