from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple


class EstimatorKind(str, Enum):
    HARD = "hard"
    LASSO = "lasso"
    ADAPTIVE_LASSO = "adaptive"
    SCAD = "scad"


class Command(str, Enum):
    SOLVE_B = "solve-b"
    EFFICIENCY_CURVE = "efficiency-curve"
    COVERAGE_AUDIT = "coverage-audit"
    TAU_MAX = "tau-max"
    FIGURE_PROFILE = "figure-profile"
    THEOREM1 = "theorem1"
    THEOREM2 = "theorem2"
    MC_COVERAGE = "mc-coverage"


DEFAULT_SCAD_A = 3.7


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise ValueError("Quadrature tolerances must be > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class EstimatorSpec:
    kind: EstimatorKind
    tau: float
    scad_a: float = DEFAULT_SCAD_A

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EstimatorKind(self.kind))
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not self.scad_a > 2:
            raise ValueError(f"SCAD constant a must be > 2, got {self.scad_a}")

    def breakpoints(self, r: float = 1.0) -> Tuple[float, ...]:
        """Positive locations where the rule changes regime (threshold scaled by r)."""
        threshold = r * self.tau
        if self.kind == EstimatorKind.SCAD:
            return (threshold, 2.0 * threshold, self.scad_a * threshold)
        return (threshold,)


@dataclass
class EfficiencyRecord:
    psi: float
    coverage: float
    expected_length: float
    efficiency: float


@dataclass
class EfficiencyCurve:
    """Sampled coverage / expected length / relative efficiency over a psi grid.

    ``reference_length`` is the length the efficiency is measured against:
    2z for the known-variance interval, 2 t(n-1) E(R) otherwise.
    """

    reference_length: float
    records: List[EfficiencyRecord] = field(default_factory=list)

    def efficiencies(self) -> List[float]:
        return [record.efficiency for record in self.records]

    def max_efficiency(self) -> float:
        return max(self.efficiencies())

    def min_coverage(self) -> float:
        return min(record.coverage for record in self.records)

    def efficiency_at(self, psi: float) -> float:
        nearest = min(self.records, key=lambda record: abs(record.psi - psi))
        return nearest.efficiency


@dataclass
class CoverageAudit:
    min_coverage: float
    argmin_psi: float
    threshold: float
    passed: bool


@dataclass
class ContainmentReport:
    kind: EstimatorKind
    tau: float
    contained: bool
    worst_x: float
    margin: float


@dataclass
class ProfileRow:
    x: float
    lower: float
    estimate: float
    upper: float


@dataclass
class SolveLogEntry:
    round: int
    iteration: int
    objective: float
    max_violation: float


@dataclass
class Theorem1Row:
    n: int
    eta: float
    sqrt_n_eta: float
    p_a_complement: float
    lower_bound: float


@dataclass
class Theorem2Row:
    n: int
    sup_coverage_diff: float
    sup_length_diff: float


@dataclass
class OutputPayload:
    content: str
    filename: str
    encoding: str = "utf-8"
    meta: Dict[str, str] = field(default_factory=dict)
    summary: Optional[str] = None


@dataclass
class MonteCarloRow:
    psi: float
    estimate: float
    std_error: float
    exact: float

    @property
    def z_score(self) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.estimate == self.exact else float("inf")
        return (self.estimate - self.exact) / self.std_error
