from __future__ import annotations

import csv
import io
from dataclasses import astuple
from enum import Enum
from typing import Iterable, List, Optional, Sequence

from ..interval import BFunction, to_json
from ..models import (
    EfficiencyCurve,
    MonteCarloRow,
    OutputPayload,
    ProfileRow,
    SolveLogEntry,
    Theorem1Row,
    Theorem2Row,
)
from ..utils import format_float


EFFICIENCY_HEADER = ("psi", "coverage", "length", "efficiency")
PROFILE_HEADER = ("x", "lower", "estimate", "upper")
THEOREM1_HEADER = ("n", "eta", "sqrt_n_eta", "p_a_complement", "lower_bound")
THEOREM2_HEADER = ("n", "sup_coverage_diff", "sup_length_diff")
SOLVE_LOG_HEADER = ("round", "iteration", "objective", "max_violation")
TAU_MAX_HEADER = ("kind", "tau_max", "z", "matches_z")
MC_HEADER = ("psi", "estimate", "std_error", "exact", "z_score")


def format_cell(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    """RFC 4180 text: CRLF line ends, '.' decimals, 17 significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"Row has {len(row)} cells, header has {len(header)}")
        writer.writerow([format_cell(value) for value in row])
    return buffer.getvalue()


def build_table(
    filename: str,
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
    summary: Optional[str] = None,
) -> OutputPayload:
    rows = list(rows)
    return OutputPayload(
        content=render_csv(header, rows),
        filename=filename,
        meta={"kind": "csv", "rows": str(len(rows))},
        summary=summary,
    )


def efficiency_table(curve: EfficiencyCurve, filename: str) -> OutputPayload:
    rows = [(r.psi, r.coverage, r.expected_length, r.efficiency) for r in curve.records]
    summary = (
        f"min coverage {curve.min_coverage():.6f}, "
        f"efficiency(0) {curve.efficiency_at(0.0):.6f}, max efficiency {curve.max_efficiency():.6f}"
    )
    return build_table(filename, EFFICIENCY_HEADER, rows, summary)


def profile_table(rows: List[ProfileRow], filename: str) -> OutputPayload:
    return build_table(filename, PROFILE_HEADER, [astuple(row) for row in rows])


def theorem1_table_payload(rows: List[Theorem1Row], filename: str) -> OutputPayload:
    summary = f"lower bound at n={rows[-1].n}: {rows[-1].lower_bound:.6g}" if rows else None
    return build_table(filename, THEOREM1_HEADER, [astuple(row) for row in rows], summary)


def theorem2_table_payload(rows: List[Theorem2Row], filename: str) -> OutputPayload:
    return build_table(filename, THEOREM2_HEADER, [astuple(row) for row in rows])


def solve_log_table(entries: List[SolveLogEntry], filename: str) -> OutputPayload:
    return build_table(filename, SOLVE_LOG_HEADER, [astuple(entry) for entry in entries])


def bfunction_payload(bf: BFunction, filename: str) -> OutputPayload:
    return OutputPayload(
        content=to_json(bf) + "\n",
        filename=filename,
        meta={"kind": "bfunction", "knots": str(len(bf.knots))},
    )


def monte_carlo_table(rows: List[MonteCarloRow], filename: str) -> OutputPayload:
    cells = [(r.psi, r.estimate, r.std_error, r.exact, r.z_score) for r in rows]
    worst = max((abs(r.z_score) for r in rows), default=0.0)
    return build_table(filename, MC_HEADER, cells, f"largest |z| {worst:.3f}")
