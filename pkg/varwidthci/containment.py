"""Whether an estimator lies inside C* = [-b(-x), b(x)] for every x.

Containment is checked on three sets of points: a dense grid, both one-sided
limits at every breakpoint of the estimator and of b, and the tail
|x| > max(a tau, q) where estimator and b are affine and the margin has a
closed form.

With r != 1 the unknown-variance form is checked: the estimate uses the
threshold r * tau and the interval is [-r b(-x / r), r b(x / r)]. Every rule
is homogeneous, so the verdict does not depend on r and the margin scales
by r.
"""
from __future__ import annotations

import logging
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .estimators import psi_tilde
from .interval import BFunction, eval_b
from .models import DEFAULT_SCAD_A, ContainmentReport, EstimatorKind, EstimatorSpec, ProfileRow


logger = logging.getLogger(__name__)

DEFAULT_SPACING = 1e-3
TAU_FLOOR = 1e-6
TAU_CEILING = 10.0
DEFAULT_TAU_TOL = 1e-4
EXTENT_PAD = 2.0


class ContainmentError(RuntimeError):
    pass


def _reach(spec: EstimatorSpec) -> float:
    """Largest breakpoint of the rule for r = 1."""
    return spec.breakpoints()[-1]


def default_extent(bf: BFunction, spec: EstimatorSpec) -> float:
    return _reach(spec) + bf.q + bf.z + EXTENT_PAD


def _one_sided(points: np.ndarray) -> np.ndarray:
    return np.concatenate(
        [points, np.nextafter(points, np.inf), np.nextafter(points, -np.inf)]
    )


def _check_points(bf: BFunction, spec: EstimatorSpec, spacing: float, extent: float, r: float) -> np.ndarray:
    count = int(np.ceil(2.0 * extent / spacing)) + 1
    grid = np.linspace(-extent, extent, count)
    breaks = np.asarray(spec.breakpoints())
    knots = bf.knot_array
    special_points = np.concatenate([breaks, -breaks, knots, -knots])
    # scaled to the r-frame, where the interval's kinks sit at r * knot
    return r * np.unique(np.concatenate([grid, _one_sided(special_points)]))


def _margins(bf: BFunction, spec: EstimatorSpec, x: np.ndarray, r: float) -> np.ndarray:
    estimate = psi_tilde(spec, x, r)
    upper = r * eval_b(bf, x / r)
    lower_gap = estimate + r * eval_b(bf, -x / r)
    return np.minimum(upper - estimate, lower_gap)


def _tail_margin(bf: BFunction, spec: EstimatorSpec) -> Tuple[float, float]:
    """Infimum of the margin over |x| > x_tail, in the r = 1 frame, and x_tail."""
    x_tail = max(_reach(spec), bf.q)
    if spec.kind == EstimatorKind.LASSO:
        margin = bf.z - spec.tau
    elif spec.kind == EstimatorKind.ADAPTIVE_LASSO:
        margin = bf.z - spec.tau * spec.tau / x_tail
    else:
        margin = bf.z
    return margin, x_tail


def check_containment(
    bf: BFunction,
    spec: EstimatorSpec,
    spacing: float = DEFAULT_SPACING,
    extent: Optional[float] = None,
    r: float = 1.0,
) -> ContainmentReport:
    if not spacing > 0:
        raise ValueError("spacing must be > 0")
    if not r > 0:
        raise ValueError(f"r must be > 0, got {r}")
    extent = default_extent(bf, spec) if extent is None else float(extent)

    x = _check_points(bf, spec, spacing, extent, r)
    margins = _margins(bf, spec, x, r)
    worst = int(np.argmin(margins))
    margin, worst_x = float(margins[worst]), float(x[worst])

    tail_margin, x_tail = _tail_margin(bf, spec)
    if r * tail_margin < margin:
        margin, worst_x = r * tail_margin, -r * x_tail

    return ContainmentReport(
        kind=spec.kind,
        tau=spec.tau,
        contained=margin >= 0.0,
        worst_x=worst_x,
        margin=margin,
    )


def tau_max(
    bf: BFunction,
    kind: EstimatorKind,
    scad_a: float = DEFAULT_SCAD_A,
    tol: float = DEFAULT_TAU_TOL,
    spacing: float = DEFAULT_SPACING,
) -> float:
    """Largest tau keeping the estimate inside C* for all x, by bisection."""
    if not tol > 0:
        raise ValueError("tol must be > 0")
    kind = EstimatorKind(kind)
    # one grid for every trial tau so margins along the trace are comparable
    extent = default_extent(bf, EstimatorSpec(kind, TAU_CEILING, scad_a))
    trace: List[Tuple[float, float]] = []

    def contained(tau: float) -> bool:
        report = check_containment(bf, EstimatorSpec(kind, tau, scad_a), spacing, extent)
        trace.append((tau, report.margin))
        logger.debug("tau=%.8f margin=%.3e worst_x=%.6f", tau, report.margin, report.worst_x)
        return report.contained

    lo, hi = TAU_FLOOR, TAU_CEILING
    if not contained(lo):
        raise ContainmentError(f"{kind.value} estimator is not contained even at tau={lo}")
    if contained(hi):
        raise ContainmentError(f"{kind.value} estimator is still contained at the ceiling tau={hi}")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if contained(mid):
            lo = mid
        else:
            hi = mid

    _assert_monotone(trace, spacing * (2.0 + bf.lipschitz_L), kind)
    return 0.5 * (lo + hi)


def _assert_monotone(trace: List[Tuple[float, float]], slack: float, kind: EstimatorKind) -> None:
    ordered = sorted(trace)
    for (tau_a, margin_a), (tau_b, margin_b) in zip(ordered, ordered[1:]):
        if margin_b > margin_a + slack:
            raise ContainmentError(
                f"{kind.value}: margin rose from {margin_a:.6g} at tau={tau_a:.6g} "
                f"to {margin_b:.6g} at tau={tau_b:.6g}"
            )


def tau_max_all(
    bf: BFunction,
    scad_a: float = DEFAULT_SCAD_A,
    tol: float = DEFAULT_TAU_TOL,
) -> Dict[EstimatorKind, float]:
    return {kind: tau_max(bf, kind, scad_a, tol) for kind in EstimatorKind}


def figure_profile(bf: BFunction, spec: EstimatorSpec, x_grid: Iterable[float]) -> List[ProfileRow]:
    x = np.asarray(list(x_grid), dtype=float)
    if x.size == 0:
        raise ValueError("x_grid must not be empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("x_grid must be finite")
    upper = np.atleast_1d(eval_b(bf, x))
    lower = -np.atleast_1d(eval_b(bf, -x))
    estimate = np.atleast_1d(psi_tilde(spec, x, 1.0))
    return [
        ProfileRow(x=float(a), lower=float(lo), estimate=float(est), upper=float(up))
        for a, lo, est, up in zip(x, lower, estimate, upper)
    ]
