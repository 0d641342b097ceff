"""Seeded simulation cross-checks for the quadrature-based functionals.

Each psi gets its own child stream spawned from ``SeedSequence(seed)``; the
same seed and psi list reproduce every row bit for bit.
"""
from __future__ import annotations

import math
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..interval import BFunction, coverage_known, eval_b
from ..models import MonteCarloRow
from ..var_unknown import coverage_unknown, make_context


DEFAULT_CHUNK = 1_000_000


def _chunks(draws: int, chunk: int) -> List[int]:
    if draws < 1 or chunk < 1:
        raise ValueError("draws and chunk must be >= 1")
    full, rest = divmod(draws, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _estimate(hits: int, draws: int) -> tuple[float, float]:
    p = hits / draws
    return p, math.sqrt(max(p * (1.0 - p), 0.0) / draws)


def _contained(bf: BFunction, psi: float, x: np.ndarray, r: Optional[np.ndarray]) -> np.ndarray:
    if r is None:
        return (-eval_b(bf, -x) <= psi) & (psi <= eval_b(bf, x))
    return (-r * eval_b(bf, -x / r) <= psi) & (psi <= r * eval_b(bf, x / r))


def _sample_r(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    k = n - 1
    return np.sqrt(rng.chisquare(k, size) / k)


def simulate_coverage(
    bf: BFunction,
    psi: float,
    draws: int,
    rng: np.random.Generator,
    n: int = 0,
    chunk: int = DEFAULT_CHUNK,
) -> tuple[float, float]:
    """(estimate, standard error) of coverage; n = 0 is the known-variance interval."""
    if n and n < 2:
        raise ValueError(f"n must be 0 or >= 2, got {n}")
    hits = 0
    for size in _chunks(draws, chunk):
        x = rng.normal(psi, 1.0, size)
        r = _sample_r(rng, n, size) if n else None
        hits += int(np.count_nonzero(_contained(bf, psi, x, r)))
    return _estimate(hits, draws)


def simulate_prob_a_complement(
    n: int,
    eta: float,
    draws: int,
    rng: np.random.Generator,
    chunk: int = DEFAULT_CHUNK,
) -> tuple[float, float]:
    """(estimate, standard error) of P(|X_n| > R sqrt(n) eta), X_n ~ N(sqrt(n) eta / 2, 1)."""
    if n < 2 or not eta > 0:
        raise ValueError("n must be >= 2 and eta > 0")
    s = math.sqrt(n) * eta
    hits = 0
    for size in _chunks(draws, chunk):
        x = rng.normal(0.5 * s, 1.0, size)
        r = _sample_r(rng, n, size)
        hits += int(np.count_nonzero(np.abs(x) > r * s))
    return _estimate(hits, draws)


def coverage_study(
    bf: BFunction,
    psi_values: Sequence[float],
    draws: int,
    seed: int,
    n: int = 0,
    log: Callable[[str], None] | None = None,
) -> List[MonteCarloRow]:
    """Simulated against exact coverage at each psi."""
    children = np.random.SeedSequence(seed).spawn(len(psi_values))
    ctx = make_context(bf, n) if n else None
    rows: List[MonteCarloRow] = []
    for psi, child in zip(psi_values, children):
        psi = float(psi)
        estimate, std_error = simulate_coverage(bf, psi, draws, np.random.default_rng(child), n)
        exact = coverage_unknown(ctx, psi) if ctx else coverage_known(bf, psi)
        row = MonteCarloRow(psi=psi, estimate=estimate, std_error=std_error, exact=exact)
        if log:
            log(f"psi={psi:g}: simulated {estimate:.6f} +/- {std_error:.2e}, exact {exact:.6f}")
        rows.append(row)
    return rows
