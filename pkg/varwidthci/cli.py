from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from .asymptotics import Theorem1Schedule, theorem1_table
from .config import STANDARD_BFUN, ConfigError, RunConfig, default_output_dir, load_config, merge
from .containment import ContainmentError, figure_profile, tau_max
from .interval import BFunction, BFunctionError, efficiency_known, load_bfunction, standard_b
from .models import Command, EstimatorKind, EstimatorSpec, OutputPayload
from .numerics import ConvergenceError, DomainError
from .services.exporter import export_payloads, write_manifest
from .services.montecarlo import coverage_study
from .services.tables import (
    TAU_MAX_HEADER,
    bfunction_payload,
    build_table,
    efficiency_table,
    monte_carlo_table,
    profile_table,
    solve_log_table,
    theorem1_table_payload,
    theorem2_table_payload,
)
from .solver import SolverConfig, SolverError, audit_coverage, default_audit_grid, solve
from .utils import InputParseError, arange_grid, parse_float_list, parse_int_list
from .var_unknown import efficiency_unknown, make_context, theorem2_diagnostics


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

# |tau_max - z| below which tau_max is reported as matching z
Z_MATCH_TOL = 1e-3

DEFAULT_FILENAMES: Dict[Command, str] = {
    Command.SOLVE_B: "bfun.json",
    Command.EFFICIENCY_CURVE: "efficiency.csv",
    Command.COVERAGE_AUDIT: "audit.csv",
    Command.TAU_MAX: "tau_max.csv",
    Command.FIGURE_PROFILE: "profile.csv",
    Command.THEOREM1: "theorem1.csv",
    Command.THEOREM2: "theorem2.csv",
    Command.MC_COVERAGE: "mc_coverage.csv",
}


class AuditFailedError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        _emit_error("UsageError", message)
        raise SystemExit(EXIT_USAGE)


def _emit_error(error: str, message: str, details: Optional[Dict[str, object]] = None) -> None:
    record = {"error": error, "message": message, "details": details or {}}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="varwidthci",
        description="Variable-width confidence intervals that contain thresholding estimators",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--out", help="primary output file")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    def add(command: Command, help_text: str) -> argparse.ArgumentParser:
        return subparsers.add_parser(
            command.value, parents=[common], help=help_text, argument_default=argparse.SUPPRESS
        )

    def bfun(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--bfun", help=f"BFunction JSON file, or '{STANDARD_BFUN}'")
        sub.add_argument("--alpha", type=float, help="level used for the standard interval")

    def psi_grid(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--psi-min", type=float)
        sub.add_argument("--psi-max", type=float)
        sub.add_argument("--step", type=float)

    solve_cmd = add(Command.SOLVE_B, "solve for b given alpha and w")
    solve_cmd.add_argument("--alpha", type=float)
    solve_cmd.add_argument("--w", type=float)
    solve_cmd.add_argument("--q", type=float)
    solve_cmd.add_argument("--knot-count", type=int)
    solve_cmd.add_argument("--spread-scale", type=float, help="scale of the weight over psi; 0 for flat")
    solve_cmd.add_argument("--lipschitz-L", dest="lipschitz_L", type=float)
    solve_cmd.add_argument("--max-iterations", type=int)
    solve_cmd.add_argument("--constraint-tol", type=float)

    curve_cmd = add(Command.EFFICIENCY_CURVE, "coverage, expected length and efficiency over psi")
    bfun(curve_cmd)
    psi_grid(curve_cmd)
    curve_cmd.add_argument("--n", type=int, help="sample size; omit for known variance")

    audit_cmd = add(Command.COVERAGE_AUDIT, "minimum coverage on the audit grid")
    bfun(audit_cmd)

    tau_cmd = add(Command.TAU_MAX, "largest tau with the estimate always inside the interval")
    bfun(tau_cmd)
    tau_cmd.add_argument("--kind", choices=[k.value for k in EstimatorKind] + ["all"])
    tau_cmd.add_argument("--scad-a", type=float)
    tau_cmd.add_argument("--tol", type=float)

    profile_cmd = add(Command.FIGURE_PROFILE, "interval endpoints and estimate as functions of x")
    bfun(profile_cmd)
    profile_cmd.add_argument("--kind", choices=[k.value for k in EstimatorKind])
    profile_cmd.add_argument("--tau", type=float)
    profile_cmd.add_argument("--scad-a", type=float)
    profile_cmd.add_argument("--x-min", type=float)
    profile_cmd.add_argument("--x-max", type=float)
    profile_cmd.add_argument("--x-step", type=float)

    t1_cmd = add(Command.THEOREM1, "expected-length lower bound under consistent tuning")
    t1_cmd.add_argument("--gamma", type=float)
    t1_cmd.add_argument("--n-values", help="comma separated sample sizes")
    t1_cmd.add_argument("--alpha", type=float)

    t2_cmd = add(Command.THEOREM2, "known versus unknown variance gaps as n grows")
    bfun(t2_cmd)
    t2_cmd.add_argument("--n-list", help="comma separated sample sizes")
    t2_cmd.add_argument("--step", type=float)

    mc_cmd = add(Command.MC_COVERAGE, "simulated coverage against the exact value")
    bfun(mc_cmd)
    mc_cmd.add_argument("--psi-values", help="comma separated psi values")
    mc_cmd.add_argument("--draws", type=int)
    mc_cmd.add_argument("--seed", type=int)
    mc_cmd.add_argument("--n", type=int, help="sample size; omit for known variance")

    return parser


def resolve_bfunction(config: RunConfig) -> BFunction:
    if config.bfun == STANDARD_BFUN:
        return standard_b(config.alpha)
    path = Path(config.bfun)
    if not path.exists():
        raise ConfigError(f"BFunction file not found: {path}")
    return load_bfunction(path)


def _output_path(config: RunConfig) -> Path:
    if config.out:
        return Path(config.out)
    return default_output_dir() / DEFAULT_FILENAMES[Command(config.command)]


def _solve_b(config: RunConfig, out: Path, log: Callable[[str], None]) -> List[OutputPayload]:
    solver_config = SolverConfig(
        w=config.w,
        alpha=config.alpha,
        q=config.q,
        knot_count=config.knot_count,
        spread_scale=config.spread_scale,
        max_iterations=config.max_iterations,
        constraint_tol=config.constraint_tol,
        lipschitz_L=config.lipschitz_L,
    )
    log_name = f"{out.stem}.log.csv"
    try:
        result = solve(solver_config, log)
    except SolverError as exc:
        export_payloads([solve_log_table(exc.log, log_name)], out.parent, log)
        raise
    print(
        f"min coverage {result.audit.min_coverage:.6f} at psi={result.audit.argmin_psi:.4f} "
        f"after {result.rounds} round(s)"
    )
    return [bfunction_payload(result.bfunction, out.name), solve_log_table(result.log, log_name)]


def _efficiency_curve(config: RunConfig, out: Path) -> List[OutputPayload]:
    bf = resolve_bfunction(config)
    grid = arange_grid(config.psi_min, config.psi_max, config.step)
    if config.n:
        curve = efficiency_unknown(make_context(bf, config.n), grid)
    else:
        curve = efficiency_known(bf, grid)
    payload = efficiency_table(curve, out.name)
    print(payload.summary)
    return [payload]


def _coverage_audit(config: RunConfig, out: Path) -> List[OutputPayload]:
    bf = resolve_bfunction(config)
    grid = default_audit_grid(bf)
    audit = audit_coverage(bf, bf.alpha, grid)
    verdict = "pass" if audit.passed else "FAIL"
    summary = f"min coverage {audit.min_coverage:.8f} at psi={audit.argmin_psi:.4f}: {verdict}"
    print(summary)
    rows = [("min_coverage", audit.min_coverage), ("argmin_psi", audit.argmin_psi),
            ("threshold", audit.threshold), ("passed", audit.passed)]
    payload = build_table(out.name, ("field", "value"), rows, summary)
    payload.meta["passed"] = "true" if audit.passed else "false"
    return [payload]


def _tau_max(config: RunConfig, out: Path) -> List[OutputPayload]:
    bf = resolve_bfunction(config)
    kinds = list(EstimatorKind) if config.kind == "all" else [EstimatorKind(config.kind)]
    rows = []
    for kind in kinds:
        value = tau_max(bf, kind, config.scad_a, config.tol)
        matches = abs(value - bf.z) <= Z_MATCH_TOL
        print(f"{kind.value}: tau_max = {value:.4f} (z = {bf.z:.6f}{', matches z' if matches else ''})")
        rows.append((kind, value, bf.z, matches))
    return [build_table(out.name, TAU_MAX_HEADER, rows)]


def _figure_profile(config: RunConfig, out: Path) -> List[OutputPayload]:
    bf = resolve_bfunction(config)
    spec = EstimatorSpec(EstimatorKind(config.kind), config.tau, config.scad_a)
    grid = arange_grid(config.x_min, config.x_max, config.x_step)
    return [profile_table(figure_profile(bf, spec, grid), out.name)]


def _theorem1(config: RunConfig, out: Path) -> List[OutputPayload]:
    schedule = Theorem1Schedule(
        n_values=tuple(parse_int_list(config.n_values)), gamma=config.gamma, alpha=config.alpha
    )
    if not schedule.limits_hold():
        logger.warning("%s does not show eta_n -> 0 with sqrt(n) eta_n -> oo", schedule.eta_rule)
    payload = theorem1_table_payload(theorem1_table(schedule), out.name)
    print(payload.summary)
    return [payload]


def _theorem2(config: RunConfig, out: Path) -> List[OutputPayload]:
    bf = resolve_bfunction(config)
    grid = arange_grid(0.0, bf.q + 9.0, config.step)
    rows = theorem2_diagnostics(bf, parse_int_list(config.n_list), grid)
    for row in rows:
        print(f"n={row.n}: coverage {row.sup_coverage_diff:.3e}, length {row.sup_length_diff:.3e}")
    return [theorem2_table_payload(rows, out.name)]


def _mc_coverage(config: RunConfig, out: Path, log: Callable[[str], None]) -> List[OutputPayload]:
    bf = resolve_bfunction(config)
    rows = coverage_study(bf, parse_float_list(config.psi_values), config.draws, config.seed, config.n, log)
    payload = monte_carlo_table(rows, out.name)
    print(payload.summary)
    return [payload]


def run(config: RunConfig, log: Callable[[str], None] | None = None) -> List[Path]:
    """Run one command, write its artifacts and manifest, return the artifact paths."""
    log = log or logger.info
    command = Command(config.command)
    out = _output_path(config)

    if command == Command.SOLVE_B:
        payloads = _solve_b(config, out, log)
    elif command == Command.EFFICIENCY_CURVE:
        payloads = _efficiency_curve(config, out)
    elif command == Command.COVERAGE_AUDIT:
        payloads = _coverage_audit(config, out)
    elif command == Command.TAU_MAX:
        payloads = _tau_max(config, out)
    elif command == Command.FIGURE_PROFILE:
        payloads = _figure_profile(config, out)
    elif command == Command.THEOREM1:
        payloads = _theorem1(config, out)
    elif command == Command.THEOREM2:
        payloads = _theorem2(config, out)
    else:
        payloads = _mc_coverage(config, out, log)

    artifacts = export_payloads(payloads, out.parent, log)
    write_manifest(artifacts[0], artifacts, config, log)

    if payloads[0].meta.get("passed") == "false":
        raise AuditFailedError(payloads[0].summary)
    return artifacts


def _details(exc: BaseException) -> Dict[str, object]:
    if isinstance(exc, ConvergenceError):
        return {"estimate": exc.estimate, "abs_error": exc.abs_error}
    if isinstance(exc, SolverError):
        last = exc.log[-1] if exc.log else None
        return {
            "iterations": len(exc.log),
            "last_objective": last.objective if last else None,
            "last_max_violation": last.max_violation if last else None,
        }
    return {}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = vars(build_parser().parse_args(argv))
    verbose = bool(args.pop("verbose", False))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)

    try:
        config_file = args.pop("config", None)
        config = load_config(Path(config_file) if config_file else None)
        config = merge(config, args)
        run(config)
    except (ConvergenceError, SolverError, ContainmentError, AuditFailedError) as exc:
        _emit_error(type(exc).__name__, str(exc), _details(exc))
        return EXIT_NUMERIC
    except (ConfigError, BFunctionError, DomainError, InputParseError, ValueError, OSError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
