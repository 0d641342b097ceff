from __future__ import annotations

import math

import numpy as np
import pytest

from varwidthci.estimators import (
    psi_from_theta,
    psi_hat,
    psi_tilde,
    summarize_sample,
    theta_estimate,
    theta_from_psi,
)
from varwidthci.models import EstimatorKind, EstimatorSpec


KINDS = list(EstimatorKind)
GRID = np.linspace(-12.0, 12.0, 10_001)


def test_examples():
    assert psi_hat(EstimatorSpec(EstimatorKind.HARD, 1.96), 1.5) == 0.0
    assert psi_hat(EstimatorSpec(EstimatorKind.ADAPTIVE_LASSO, 1.0), 2.0) == pytest.approx(1.5)
    scad = psi_hat(EstimatorSpec(EstimatorKind.SCAD, 1.0, 3.7), 3.0)
    assert scad == pytest.approx((2.7 * 3.0 - 3.7) / 1.7, abs=1e-12)
    assert scad == pytest.approx(2.588235294, abs=1e-9)


def test_psi_tilde_examples():
    assert psi_tilde(EstimatorSpec("hard", 1.0), 1.5, 2.0) == 0.0
    assert psi_tilde(EstimatorSpec("lasso", 1.0), 2.0, 0.5) == pytest.approx(1.5)


@pytest.mark.parametrize("kind", KINDS)
def test_psi_tilde_with_unit_r_is_psi_hat(kind):
    spec = EstimatorSpec(kind, 1.3)
    np.testing.assert_array_equal(psi_tilde(spec, GRID, 1.0), psi_hat(spec, GRID))


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("r", [1.0, 0.4, 2.5])
def test_thresholds_to_zero(kind, r):
    spec = EstimatorSpec(kind, 1.7)
    inside = GRID[np.abs(GRID) <= r * spec.tau]
    assert np.all(psi_tilde(spec, inside, r) == 0.0)
    assert psi_tilde(spec, r * spec.tau, r) == 0.0
    assert psi_tilde(spec, -r * spec.tau, r) == 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_odd_symmetry(kind):
    spec = EstimatorSpec(kind, 1.1)
    np.testing.assert_array_equal(psi_hat(spec, -GRID), -psi_hat(spec, GRID))


def test_zero_maps_to_positive_zero():
    for kind in KINDS:
        value = psi_hat(EstimatorSpec(kind, 1.0), 0.0)
        assert value == 0.0
        assert math.copysign(1.0, value) == 1.0


@pytest.mark.parametrize("kind", KINDS)
def test_shrinkage(kind):
    spec = EstimatorSpec(kind, 0.9)
    assert np.all(np.abs(psi_hat(spec, GRID)) <= np.abs(GRID))


@pytest.mark.parametrize(
    "kind", [EstimatorKind.LASSO, EstimatorKind.ADAPTIVE_LASSO, EstimatorKind.SCAD]
)
def test_continuity_at_breakpoints(kind):
    spec = EstimatorSpec(kind, 1.2)
    h = 1e-9
    for point in spec.breakpoints():
        for x in (point, -point):
            assert abs(psi_hat(spec, x + h) - psi_hat(spec, x - h)) < 1e-7
    values = psi_hat(spec, GRID)
    assert np.max(np.abs(np.diff(values))) <= 2.0 * (GRID[1] - GRID[0]) + 1e-12


def test_hard_threshold_jump():
    spec = EstimatorSpec(EstimatorKind.HARD, 1.5)
    assert psi_hat(spec, 1.5) == 0.0
    assert psi_hat(spec, np.nextafter(1.5, np.inf)) == pytest.approx(1.5)
    assert psi_hat(spec, -1.5) == 0.0
    assert psi_hat(spec, np.nextafter(-1.5, -np.inf)) == pytest.approx(-1.5)


def test_identity_far_out():
    hard = EstimatorSpec(EstimatorKind.HARD, 1.0)
    scad = EstimatorSpec(EstimatorKind.SCAD, 1.0, 3.7)
    adaptive = EstimatorSpec(EstimatorKind.ADAPTIVE_LASSO, 1.0)
    far = GRID[np.abs(GRID) > 3.7]
    np.testing.assert_array_equal(psi_hat(hard, far), far)
    np.testing.assert_array_equal(psi_hat(scad, far), far)
    assert np.all(np.abs(psi_hat(adaptive, far) - far) <= 1.0 / np.abs(far) + 1e-12)


def test_breakpoints():
    assert EstimatorSpec("lasso", 2.0).breakpoints() == (2.0,)
    assert EstimatorSpec("scad", 1.0, 3.7).breakpoints(r=2.0) == (2.0, 4.0, 7.4)


def test_spec_validation():
    with pytest.raises(ValueError):
        EstimatorSpec("hard", 0.0)
    with pytest.raises(ValueError):
        EstimatorSpec("scad", 1.0, 2.0)
    with pytest.raises(ValueError):
        EstimatorSpec("ridge", 1.0)
    assert EstimatorSpec("adaptive", 1.0).kind is EstimatorKind.ADAPTIVE_LASSO


def test_psi_tilde_rejects_nonpositive_r():
    with pytest.raises(ValueError):
        psi_tilde(EstimatorSpec("hard", 1.0), 1.0, 0.0)


def test_theta_scaling():
    assert theta_from_psi(0.0, 10, 1.0) == 0.0
    assert theta_from_psi(1.96, 100, 2.0) == pytest.approx(0.392, abs=1e-12)
    theta = 0.731
    assert theta_from_psi(psi_from_theta(theta, 37, 1.4), 37, 1.4) == pytest.approx(theta, abs=1e-12)


def test_theta_estimate_uses_sigma_eta_threshold():
    assert theta_estimate("hard", 0.1, 1.0, 0.2) == 0.0
    assert theta_estimate("lasso", 1.0, 1.0, 0.2) == pytest.approx(0.8)
    assert theta_estimate("adaptive", -1.0, 2.0, 0.25) == pytest.approx(-1.0 + 0.25)
    with pytest.raises(ValueError):
        theta_estimate("hard", 1.0, 0.0, 0.2)


def test_summarize_sample():
    assert summarize_sample([1.0, 2.0, 3.0]) == (3, 2.0, 1.0)
    with pytest.raises(ValueError):
        summarize_sample([1.0])
