from __future__ import annotations

import numpy as np
import pytest

from varwidthci.containment import (
    ContainmentError,
    check_containment,
    default_extent,
    figure_profile,
    tau_max,
    tau_max_all,
)
from varwidthci.interval import BFunction, eval_b
from varwidthci.models import EstimatorKind, EstimatorSpec


KINDS = list(EstimatorKind)


@pytest.fixture(scope="module")
def overreaching() -> BFunction:
    """b(3) = 2.7 < 3, so no estimator close to the identity fits inside."""
    z = 1.959963984540054
    return BFunction(alpha=0.05, q=6.0, knots=(-6.0, 3.0, 6.0), e_values=(0.0, -z - 0.3, 0.0))


def test_standard_hard_at_z_is_boundary_tight(standard):
    report = check_containment(standard, EstimatorSpec(EstimatorKind.HARD, standard.z))
    assert report.contained
    assert report.margin == pytest.approx(0.0, abs=1e-12)
    assert report.worst_x == pytest.approx(-standard.z, abs=1e-9)


def test_standard_hard_just_above_z_fails(standard):
    tau = standard.z + 0.01
    report = check_containment(standard, EstimatorSpec(EstimatorKind.HARD, tau))
    assert not report.contained
    assert report.margin == pytest.approx(-0.01, abs=1e-9)
    assert -tau - 1e-9 <= report.worst_x <= -standard.z
    assert report.kind is EstimatorKind.HARD
    assert report.tau == tau


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("fixture", ["standard", "single_knot", "asymmetric"])
def test_tiny_threshold_is_contained(request, kind, fixture):
    bf = request.getfixturevalue(fixture)
    assert check_containment(bf, EstimatorSpec(kind, 1e-6)).contained


@pytest.mark.parametrize("kind", KINDS)
def test_tau_max_of_standard_is_z(standard, kind):
    assert tau_max(standard, kind) == pytest.approx(standard.z, abs=1e-4)


def test_tau_max_all_covers_every_kind(standard):
    values = tau_max_all(standard, tol=1e-3)
    assert set(values) == set(EstimatorKind)
    for value in values.values():
        assert value == pytest.approx(standard.z, abs=1e-3)


def test_tau_max_rejects_bad_tolerance(standard):
    with pytest.raises(ValueError):
        tau_max(standard, EstimatorKind.HARD, tol=0.0)


@pytest.mark.parametrize("kind", KINDS)
def test_tau_max_reports_containment_failure_at_floor(overreaching, kind):
    assert not check_containment(overreaching, EstimatorSpec(kind, 1e-6)).contained
    with pytest.raises(ContainmentError, match="not contained"):
        tau_max(overreaching, kind, tol=1e-2)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("r", [0.5, 1.7])
def test_unknown_variance_form_scales_with_r(single_knot, kind, r):
    spec = EstimatorSpec(kind, 1.2)
    base = check_containment(single_knot, spec)
    scaled = check_containment(single_knot, spec, r=r)
    assert scaled.contained == base.contained
    assert scaled.margin == pytest.approx(r * base.margin, rel=1e-9, abs=1e-12)


def test_tail_margin_binds_for_lasso(standard):
    report = check_containment(standard, EstimatorSpec(EstimatorKind.LASSO, 1.0))
    assert report.contained
    assert report.margin == pytest.approx(standard.z - 1.0, abs=1e-12)


def test_check_containment_validates_arguments(standard):
    spec = EstimatorSpec(EstimatorKind.HARD, 1.0)
    with pytest.raises(ValueError):
        check_containment(standard, spec, spacing=0.0)
    with pytest.raises(ValueError):
        check_containment(standard, spec, r=0.0)


def test_default_extent(standard):
    scad = EstimatorSpec(EstimatorKind.SCAD, 1.0, 3.7)
    assert default_extent(standard, scad) == pytest.approx(3.7 + 1.0 + standard.z + 2.0)


def test_figure_profile_examples(standard):
    hard = EstimatorSpec(EstimatorKind.HARD, 1.96)
    rows = figure_profile(standard, hard, [0.0, 1.95])
    assert rows[0].lower == pytest.approx(-standard.z) and rows[0].upper == pytest.approx(standard.z)
    assert rows[0].estimate == 0.0
    assert rows[1].estimate == 0.0
    assert rows[1].lower <= 0.0 <= rows[1].upper

    scad = EstimatorSpec(EstimatorKind.SCAD, 1.96, 3.7)
    (far,) = figure_profile(standard, scad, [8.0])
    assert far.estimate == 8.0
    assert far.lower == pytest.approx(8.0 - standard.z, abs=1e-12)
    assert far.upper == pytest.approx(8.0 + standard.z, abs=1e-12)


def test_figure_profile_is_odd_for_symmetric_b(single_knot):
    x = np.linspace(-5.0, 5.0, 201)
    spec = EstimatorSpec(EstimatorKind.ADAPTIVE_LASSO, 1.5)
    rows = figure_profile(single_knot, spec, x)
    mirrored = figure_profile(single_knot, spec, -x)
    for row, other in zip(rows, mirrored):
        assert row.estimate == pytest.approx(-other.estimate, abs=1e-15)
        assert row.upper == pytest.approx(-other.lower, abs=1e-15)
    assert [row.upper for row in rows] == pytest.approx(list(eval_b(single_knot, x)), abs=1e-15)


def test_figure_profile_rejects_bad_grid(standard):
    spec = EstimatorSpec(EstimatorKind.HARD, 1.0)
    with pytest.raises(ValueError):
        figure_profile(standard, spec, [])
    with pytest.raises(ValueError):
        figure_profile(standard, spec, [0.0, float("inf")])


@pytest.mark.slow
@pytest.mark.parametrize("kind", KINDS)
def test_tau_max_of_solved_interval(solved, kind):
    value = tau_max(solved.bfunction, kind)
    assert value == pytest.approx(1.96, abs=1e-2)


@pytest.mark.slow
def test_solved_margin_is_symmetric(solved):
    bf = solved.bfunction
    spec = EstimatorSpec(EstimatorKind.SCAD, 1.5, 3.7)
    x = np.linspace(-12.0, 12.0, 2401)
    rows = figure_profile(bf, spec, x)
    upper_gap = np.array([row.upper - row.estimate for row in rows])
    lower_gap = np.array([row.estimate - row.lower for row in rows])
    np.testing.assert_allclose(upper_gap, lower_gap[::-1], rtol=0.0, atol=1e-12)
