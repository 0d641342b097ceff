"""The interval family C* = [-b(-X), b(X)] in the known-variance scale.

b is stored through its excess e(x) = b(x) - x - z, a piecewise-linear
function on a finite knot grid spanning [-q, q] and zero outside it.

Coverage reduction: b is strictly increasing, so with u = b^{-1}

    psi <= b(X)    <=>  X >= u(psi)
    -b(-X) <= psi  <=>  X <= -u(-psi)

and for X ~ N(psi, 1) the coverage is Phi(-u(-psi) - psi) - Phi(u(psi) - psi).
Because b is piecewise linear with increasing knot values, u is the linear
interpolant through the points (b(knot), knot); outside the knot range
u(y) = y - z.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import special

from .models import EfficiencyCurve, EfficiencyRecord, QuadratureConfig
from .numerics import GAUSSIAN_CUTOFF, integrate, std_normal_pdf, two_sided_normal_quantile


logger = logging.getLogger(__name__)

DEFAULT_Q = 6.0
DEFAULT_KNOT_COUNT = 81
DEFAULT_LIPSCHITZ = 5.0
STANDARD_Q = 1.0
SLOPE_MARGIN = 1e-9
_ENDPOINT_TOL = 1e-12


class BFunctionError(ValueError):
    pass


@dataclass(frozen=True)
class BFunction:
    alpha: float
    q: float
    knots: Tuple[float, ...]
    e_values: Tuple[float, ...]
    lipschitz_L: float = DEFAULT_LIPSCHITZ
    w: Optional[float] = None
    z: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "knots", tuple(float(v) for v in self.knots))
        object.__setattr__(self, "e_values", tuple(float(v) for v in self.e_values))
        if not 0.0 < self.alpha < 1.0:
            raise BFunctionError(f"alpha must lie in (0, 1), got {self.alpha}")
        object.__setattr__(self, "z", two_sided_normal_quantile(self.alpha))
        _validate(self)

    @cached_property
    def knot_array(self) -> np.ndarray:
        return np.asarray(self.knots)

    @cached_property
    def e_array(self) -> np.ndarray:
        return np.asarray(self.e_values)

    @cached_property
    def slopes(self) -> np.ndarray:
        return np.diff(self.e_array) / np.diff(self.knot_array)

    def excess(self, x):
        """e(x), zero outside [-q, q]."""
        values = np.interp(x, self.knot_array, self.e_array, left=0.0, right=0.0)
        return float(values) if np.ndim(x) == 0 else values

    def symmetric_excess(self) -> Tuple[np.ndarray, np.ndarray]:
        """Breakpoints and values of x -> e(x) + e(-x), which is linear between them."""
        nodes = np.union1d(self.knot_array, -self.knot_array)
        values = self.excess(nodes) + self.excess(-nodes)
        return nodes, values

    def to_dict(self) -> Dict[str, object]:
        return {
            "alpha": self.alpha,
            "w": self.w,
            "q": self.q,
            "lipschitz_L": self.lipschitz_L,
            "knots": list(self.knots),
            "e_values": list(self.e_values),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "BFunction":
        missing = [key for key in ("alpha", "q", "lipschitz_L", "knots", "e_values") if key not in data]
        if missing:
            raise BFunctionError(f"BFunction document is missing keys: {', '.join(missing)}")
        w = data.get("w")
        return cls(
            alpha=float(data["alpha"]),
            q=float(data["q"]),
            knots=tuple(data["knots"]),
            e_values=tuple(data["e_values"]),
            lipschitz_L=float(data["lipschitz_L"]),
            w=None if w is None else float(w),
        )


def _validate(bf: BFunction) -> None:
    knots = np.asarray(bf.knots)
    e = np.asarray(bf.e_values)

    if not bf.q > 0 or not bf.lipschitz_L > 0:
        raise BFunctionError("q and lipschitz_L must be > 0")
    if knots.size < 2 or knots.size != e.size:
        raise BFunctionError("knots and e_values must have the same length >= 2")
    if not (np.all(np.isfinite(knots)) and np.all(np.isfinite(e))):
        raise BFunctionError("knots and e_values must be finite")
    if np.any(np.diff(knots) <= 0):
        raise BFunctionError("knots must be strictly increasing")

    span_tol = _ENDPOINT_TOL * max(1.0, bf.q)
    if abs(knots[0] + bf.q) > span_tol or abs(knots[-1] - bf.q) > span_tol:
        raise BFunctionError(f"knots must span [-q, q] = [{-bf.q}, {bf.q}]")
    if abs(e[0]) > _ENDPOINT_TOL or abs(e[-1]) > _ENDPOINT_TOL:
        raise BFunctionError("excess must vanish at -q and q")

    slopes = np.diff(e) / np.diff(knots)
    if np.max(np.abs(slopes)) > bf.lipschitz_L + _ENDPOINT_TOL:
        raise BFunctionError(
            f"excess slope {np.max(np.abs(slopes)):.6g} exceeds lipschitz_L={bf.lipschitz_L}"
        )
    if np.min(slopes) <= -1.0 + SLOPE_MARGIN:
        raise BFunctionError("b must be strictly increasing (excess slope <= -1)")

    grid = np.union1d(knots, -knots)
    pair_sum = np.interp(grid, knots, e, left=0.0, right=0.0) + np.interp(
        -grid, knots, e, left=0.0, right=0.0
    )
    if np.min(pair_sum) < -2.0 * bf.z - _ENDPOINT_TOL:
        worst = grid[int(np.argmin(pair_sum))]
        raise BFunctionError(f"upper endpoint falls below lower endpoint near x={worst:.6g}")


def make_grid(q: float = DEFAULT_Q, knot_count: int = DEFAULT_KNOT_COUNT) -> np.ndarray:
    """Equally spaced, exactly symmetric knot grid on [-q, q]."""
    if knot_count < 2:
        raise BFunctionError("knot_count must be >= 2")
    if knot_count % 2:
        half = np.linspace(0.0, q, knot_count // 2 + 1)
        return np.concatenate([-half[:0:-1], half])
    grid = np.linspace(-q, q, knot_count)
    return 0.5 * (grid - grid[::-1])


def standard_b(alpha: float, q: float = STANDARD_Q) -> BFunction:
    """The standard interval [X - z, X + z] written as a b-function (e = 0)."""
    return BFunction(alpha=alpha, q=q, knots=(-q, q), e_values=(0.0, 0.0))


def reflect(bf: BFunction) -> BFunction:
    """b-function with excess x -> e(-x)."""
    return BFunction(
        alpha=bf.alpha,
        q=bf.q,
        knots=tuple(-k for k in reversed(bf.knots)),
        e_values=tuple(reversed(bf.e_values)),
        lipschitz_L=bf.lipschitz_L,
        w=bf.w,
    )


def is_symmetric(bf: BFunction, tol: float = 1e-12) -> bool:
    knots = bf.knot_array
    if not np.allclose(knots, -knots[::-1], rtol=0.0, atol=tol):
        return False
    return bool(np.allclose(bf.e_array, bf.e_array[::-1], rtol=0.0, atol=tol))


def eval_b(bf: BFunction, x):
    arr = np.asarray(x, dtype=float)
    values = arr + bf.z + np.interp(arr, bf.knot_array, bf.e_array, left=0.0, right=0.0)
    return float(values) if np.ndim(x) == 0 else values


def inverse_from_excess(knots: np.ndarray, e: np.ndarray, z: float, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    b_knots = knots + z + e
    inside = (y >= b_knots[0]) & (y <= b_knots[-1])
    return np.where(inside, np.interp(y, b_knots, knots), y - z)


def inverse_b(bf: BFunction, y):
    values = inverse_from_excess(bf.knot_array, bf.e_array, bf.z, y)
    return float(values) if np.ndim(y) == 0 else values


def coverage_from_excess(knots: np.ndarray, e: np.ndarray, z: float, psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=float)
    x_low = inverse_from_excess(knots, e, z, psi)
    x_high = -inverse_from_excess(knots, e, z, -psi)
    return special.ndtr(x_high - psi) - special.ndtr(x_low - psi)


def coverage_known(bf: BFunction, psi):
    """P_psi(psi in C*) for X ~ N(psi, 1)."""
    values = coverage_from_excess(bf.knot_array, bf.e_array, bf.z, psi)
    return float(values) if np.ndim(psi) == 0 else values


def piecewise_linear_gaussian_integral(
    nodes: np.ndarray, values: np.ndarray, loc, scale
) -> np.ndarray:
    """Integral over [nodes[0], nodes[-1]] of f(x) N(x; loc, scale) dx.

    ``f`` is the linear interpolant of ``values`` at ``nodes``; ``values`` may
    be a matrix with one function per row. The result has one row per loc and,
    for matrix ``values``, one column per function.
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    loc = np.atleast_1d(np.asarray(loc, dtype=float))
    scale = np.broadcast_to(np.asarray(scale, dtype=float), loc.shape)

    x0 = nodes[:-1]
    widths = np.diff(nodes)
    v0 = (x0[None, :] - loc[:, None]) / scale[:, None]
    v1 = (nodes[None, 1:] - loc[:, None]) / scale[:, None]
    mass = special.ndtr(v1) - special.ndtr(v0)
    pdf_diff = std_normal_pdf(v1) - std_normal_pdf(v0)
    # first moment about the left end of each segment
    moment = (loc[:, None] - x0[None, :]) * mass - scale[:, None] * pdf_diff

    f0 = values[..., :-1]
    slope = np.diff(values, axis=-1) / widths
    return mass @ f0.T + moment @ slope.T


def mean_excess_length(bf: BFunction, psi):
    """E_psi(length of C*) - 2z, exact for piecewise-linear e."""
    nodes, values = bf.symmetric_excess()
    result = piecewise_linear_gaussian_integral(nodes, values, psi, 1.0)
    return float(result[0]) if np.ndim(psi) == 0 else result


def expected_length_known(
    bf: BFunction, psi: float, cfg: QuadratureConfig | None = None
) -> float:
    """E_psi(length of C*) = 2z + integral of (e(x) + e(-x)) phi(x - psi) over [-q, q]."""
    nodes, _ = bf.symmetric_excess()

    def integrand(x: float) -> float:
        return (bf.excess(x) + bf.excess(-x)) * std_normal_pdf(x - psi)

    total = 0.0
    for left, right in zip(nodes[:-1], nodes[1:]):
        if right < psi - GAUSSIAN_CUTOFF or left > psi + GAUSSIAN_CUTOFF:
            continue
        total += integrate(integrand, float(left), float(right), cfg)
    return 2.0 * bf.z + total


def efficiency_known(
    bf: BFunction, psi_grid: Iterable[float], cfg: QuadratureConfig | None = None
) -> EfficiencyCurve:
    reference = 2.0 * bf.z
    records: List[EfficiencyRecord] = []
    for psi in psi_grid:
        psi = float(psi)
        length = expected_length_known(bf, psi, cfg)
        records.append(
            EfficiencyRecord(
                psi=psi,
                coverage=coverage_known(bf, psi),
                expected_length=length,
                efficiency=(length / reference) ** 2,
            )
        )
    if not records:
        raise ValueError("psi_grid must not be empty")
    return EfficiencyCurve(reference_length=reference, records=records)


def to_json(bf: BFunction) -> str:
    return json.dumps(bf.to_dict(), indent=2)


def load_bfunction(path: Path) -> BFunction:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BFunctionError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise BFunctionError(f"{path} does not hold a BFunction document")
    return BFunction.from_dict(raw)


def dump_bfunction(bf: BFunction, path: Path) -> Path:
    path = Path(path)
    path.write_text(to_json(bf) + "\n", encoding="utf-8")
    return path
