from __future__ import annotations

import pytest

from varwidthci.interval import BFunction, standard_b
from varwidthci.solver import SolverConfig, solve


@pytest.fixture(scope="session")
def standard() -> BFunction:
    return standard_b(0.05)


@pytest.fixture(scope="session")
def single_knot() -> BFunction:
    """e(0) = -0.3 on q = 2, linear in between."""
    return BFunction(alpha=0.05, q=2.0, knots=(-2.0, 0.0, 2.0), e_values=(0.0, -0.3, 0.0))


@pytest.fixture(scope="session")
def asymmetric() -> BFunction:
    return BFunction(
        alpha=0.05,
        q=2.0,
        knots=(-2.0, -1.0, 0.0, 1.0, 2.0),
        e_values=(0.0, 0.2, -0.3, 0.1, 0.0),
    )


@pytest.fixture(scope="session")
def small_solve():
    return solve(SolverConfig(w=0.1, q=2.0, knot_count=9))


@pytest.fixture(scope="session")
def solved():
    """The w = 0.1, alpha = 0.05 interval on the default grid."""
    return solve(SolverConfig(w=0.1, alpha=0.05))
