from __future__ import annotations

import math

import numpy as np
import pytest

from varwidthci.models import QuadratureConfig
from varwidthci.numerics import (
    ConvergenceError,
    DomainError,
    chi_scaled_bounds,
    chi_scaled_density,
    chi_scaled_mean,
    find_root_monotone,
    integrate,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    student_t_cdf,
    student_t_quantile,
    two_sided_normal_quantile,
)


Z_975 = 1.959963984540054


def test_normal_cdf_values():
    assert std_normal_cdf(0.0) == 0.5
    assert std_normal_cdf(40.0) == pytest.approx(1.0, abs=1e-15)
    assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)


def test_normal_cdf_symmetry_and_monotonicity():
    x = np.linspace(-8.0, 8.0, 1601)
    values = std_normal_cdf(x)
    np.testing.assert_allclose(std_normal_cdf(-x), 1.0 - values, rtol=0.0, atol=1e-14)
    assert np.all(np.diff(values) >= 0.0)


def test_normal_pdf_values():
    assert std_normal_pdf(0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), abs=1e-16)
    assert isinstance(std_normal_pdf(1.0), float)
    x = np.array([-3.0, -0.5, 1.25, 6.0])
    np.testing.assert_allclose(std_normal_pdf(x), np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi), rtol=1e-14)
    assert std_normal_pdf(40.0) == pytest.approx(0.0, abs=1e-300)


@pytest.mark.parametrize("p, expected", [(0.5, 0.0), (0.975, 1.959964), (0.025, -1.959964)])
def test_normal_quantile(p, expected):
    assert std_normal_quantile(p) == pytest.approx(expected, abs=1e-5)


@pytest.mark.parametrize("p", [1e-10, 0.01, 0.3, 0.5, 0.77, 0.999])
def test_normal_quantile_round_trip(p):
    assert abs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-10


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_normal_quantile_domain(p):
    with pytest.raises(DomainError):
        std_normal_quantile(p)


def test_two_sided_normal_quantile():
    assert two_sided_normal_quantile(0.05) == pytest.approx(Z_975, abs=1e-12)


@pytest.mark.parametrize(
    "m, p, expected, tol",
    [(1, 0.75, 1.0, 1e-9), (10**6, 0.975, 1.959964, 1e-3), (9, 0.975, 2.262157, 1e-4)],
)
def test_student_t_quantile(m, p, expected, tol):
    assert student_t_quantile(m, p) == pytest.approx(expected, abs=tol)


@pytest.mark.parametrize("m", [1, 2, 9, 50, 1000])
@pytest.mark.parametrize("p", [0.01, 0.3, 0.6, 0.975])
def test_student_t_round_trip(m, p):
    assert abs(student_t_cdf(m, student_t_quantile(m, p)) - p) <= 1e-9


def test_student_t_antisymmetry():
    assert student_t_quantile(7, 0.1) == pytest.approx(-student_t_quantile(7, 0.9), abs=1e-12)


@pytest.mark.parametrize("m", [0, -3, 2.5, True])
def test_student_t_rejects_bad_dof(m):
    with pytest.raises(DomainError):
        student_t_quantile(m, 0.9)


def test_chi_density_normalised():
    total = integrate(lambda r: chi_scaled_density(10, r), 0.0, 10.0)
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("n", [2, 5, 10, 50, 200])
def test_chi_second_moment_is_one(n):
    r_lo, r_hi = chi_scaled_bounds(n)
    second = integrate(lambda r: r * r * chi_scaled_density(n, r), r_lo, r_hi)
    assert second == pytest.approx(1.0, abs=1e-7)


def test_chi_mean_matches_gamma_ratio():
    expected = math.sqrt(2.0 / 9.0) * math.exp(math.lgamma(5.0) - math.lgamma(4.5))
    assert chi_scaled_mean(10) == pytest.approx(expected, abs=1e-8)


def test_chi_mean_below_one_and_increasing():
    means = [chi_scaled_mean(n) for n in (2, 5, 10, 50, 200, 1000)]
    assert all(m < 1.0 for m in means)
    assert all(b > a for a, b in zip(means, means[1:]))


def test_chi_density_vanishes_off_support():
    assert chi_scaled_density(10, 0.0) == 0.0
    assert chi_scaled_density(10, -1.0) == 0.0


def test_chi_rejects_small_n():
    with pytest.raises(DomainError):
        chi_scaled_density(1, 1.0)
    with pytest.raises(DomainError):
        chi_scaled_mean(1)


def test_integrate_basic():
    assert integrate(std_normal_pdf, -8.0, 8.0) == pytest.approx(1.0, abs=1e-10)
    assert integrate(lambda x: 1.0, 0.0, 2.0) == pytest.approx(2.0, abs=1e-14)
    assert integrate(lambda x: x * x, 0.0, 1.0) == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert integrate(lambda x: x, 1.5, 1.5) == 0.0


def test_integrate_is_deterministic():
    first = integrate(lambda x: math.exp(-x) * math.sin(3 * x), 0.0, 7.0)
    second = integrate(lambda x: math.exp(-x) * math.sin(3 * x), 0.0, 7.0)
    assert first == second


def test_integrate_reversed_bounds():
    with pytest.raises(DomainError):
        integrate(lambda x: x, 1.0, 0.0)


def test_integrate_reports_non_convergence():
    cfg = QuadratureConfig(max_subdivisions=1)
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: math.sin(50.0 * x), 0.0, 10.0, cfg)
    assert math.isfinite(info.value.estimate)
    assert info.value.abs_error > 0


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_subdivisions=0)


def test_find_root_monotone():
    assert find_root_monotone(lambda x: x - 1.0, 0.0, 2.0) == pytest.approx(1.0, abs=1e-12)
    assert find_root_monotone(lambda x: x**3 - 8.0, 0.0, 3.0) == pytest.approx(2.0, abs=1e-12)
    root = find_root_monotone(lambda x: x + 1.959964 - 2.5, -5.0, 5.0)
    assert root == pytest.approx(0.540036, abs=1e-9)


def test_find_root_rejects_bad_bracket():
    with pytest.raises(DomainError, match="straddle"):
        find_root_monotone(lambda x: x - 5.0, 0.0, 2.0)
    with pytest.raises(DomainError):
        find_root_monotone(lambda x: x, 2.0, 0.0)
