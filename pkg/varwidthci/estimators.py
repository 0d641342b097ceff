"""Hard-thresholding, LASSO, adaptive LASSO and SCAD point estimators.

All four share the same shape: a rule applied to an observation with a
threshold. In the known-variance scale the threshold is tau, in the
unknown-variance scale it is r * tau, and in original coordinates it is
sigma_hat * eta. Every function accepts scalars or numpy arrays.
"""
from __future__ import annotations

import math
from typing import Sequence, Tuple

import numpy as np

from .models import DEFAULT_SCAD_A, EstimatorKind, EstimatorSpec


def _threshold_rule(kind: EstimatorKind, x, threshold: float, scad_a: float):
    arr = np.asarray(x, dtype=float)
    magnitude = np.abs(arr)
    sign = np.sign(arr)
    above = magnitude > threshold

    if kind == EstimatorKind.HARD:
        out = np.where(above, arr, 0.0)
    elif kind == EstimatorKind.LASSO:
        out = sign * np.maximum(magnitude - threshold, 0.0)
    elif kind == EstimatorKind.ADAPTIVE_LASSO:
        safe = np.where(above, arr, 1.0)
        out = np.where(above, arr - threshold * threshold / safe, 0.0)
    elif kind == EstimatorKind.SCAD:
        soft = sign * np.maximum(magnitude - threshold, 0.0)
        middle = ((scad_a - 1.0) * arr - sign * scad_a * threshold) / (scad_a - 2.0)
        out = np.where(
            magnitude <= 2.0 * threshold,
            soft,
            np.where(magnitude <= scad_a * threshold, middle, arr),
        )
    else:  # pragma: no cover - exhaustive over EstimatorKind
        raise ValueError(f"Unknown estimator kind: {kind}")

    # keeps exact odd symmetry and a signed-zero-free 0.0 at x = 0
    out = np.where(arr == 0.0, 0.0, out)
    if np.ndim(x) == 0:
        return float(out)
    return out


def psi_hat(spec: EstimatorSpec, x):
    """Known-variance scaled estimate: threshold tau applied to X."""
    return _threshold_rule(spec.kind, x, spec.tau, spec.scad_a)


def psi_tilde(spec: EstimatorSpec, x, r: float):
    """Unknown-variance scaled quantity: threshold r * tau applied to X."""
    if not r > 0:
        raise ValueError(f"r must be > 0, got {r}")
    return _threshold_rule(spec.kind, x, r * spec.tau, spec.scad_a)


def theta_estimate(
    kind: EstimatorKind,
    ybar,
    sigma_hat: float,
    eta: float,
    scad_a: float = DEFAULT_SCAD_A,
):
    """Estimate of theta in original coordinates, threshold sigma_hat * eta."""
    if not sigma_hat > 0 or not eta > 0:
        raise ValueError("sigma_hat and eta must be > 0")
    if not scad_a > 2:
        raise ValueError(f"SCAD constant a must be > 2, got {scad_a}")
    return _threshold_rule(EstimatorKind(kind), ybar, sigma_hat * eta, scad_a)


def summarize_sample(y: Sequence[float]) -> Tuple[int, float, float]:
    """(n, sample mean, sample standard deviation with n - 1 divisor)."""
    values = np.asarray(y, dtype=float)
    n = values.size
    if n < 2:
        raise ValueError("At least two observations are required")
    return n, float(values.mean()), float(values.std(ddof=1))


def theta_from_psi(psi_value, n: int, sigma: float):
    if n < 1 or not sigma > 0:
        raise ValueError("n must be >= 1 and sigma > 0")
    return sigma / math.sqrt(n) * psi_value


def psi_from_theta(theta, n: int, sigma: float):
    if n < 1 or not sigma > 0:
        raise ValueError("n must be >= 1 and sigma > 0")
    return math.sqrt(n) / sigma * theta
