from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from .models import DEFAULT_SCAD_A


OUTPUT_DIR_ENV = "VARWIDTHCI_OUTPUT_DIR"
STANDARD_BFUN = "standard"

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    # interval / solver
    alpha: float = 0.05
    w: float = 0.1
    q: float = 6.0
    knot_count: int = 81
    # 0 selects the flat weight
    spread_scale: float = 0.0
    lipschitz_L: float = 5.0
    max_iterations: int = 500
    constraint_tol: float = 1e-3
    bfun: str = STANDARD_BFUN
    out: str = ""
    # grids
    psi_min: float = 0.0
    psi_max: float = 8.0
    step: float = 0.05
    x_min: float = -10.0
    x_max: float = 10.0
    x_step: float = 0.01
    # estimators
    kind: str = "hard"
    tau: float = 1.96
    scad_a: float = DEFAULT_SCAD_A
    tol: float = 1e-4
    # unknown variance and asymptotics; n = 0 means known variance
    n: int = 0
    n_list: str = "10,50,200"
    gamma: float = 0.25
    n_values: str = "1e2,1e3,1e4,1e5,1e6,1e7,1e8"
    # Monte Carlo only
    seed: int = 0
    draws: int = 1_000_000
    psi_values: str = "0,1,2,5"


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV) or ".")


def _coerce(name: str, raw: Any, default: Any) -> Any:
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in _TRUE:
            return True
        if text in _FALSE:
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        try:
            value = float(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: expected an integer, got {raw!r}") from exc
        if not value.is_integer():
            raise ConfigError(f"{name}: expected an integer, got {raw!r}")
        return int(value)
    if isinstance(default, float):
        try:
            return float(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: expected a number, got {raw!r}") from exc
    return str(raw).strip()


def parse_config_text(text: str) -> Dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    values: Dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def merge(config: RunConfig, overrides: Mapping[str, Any]) -> RunConfig:
    """Copy of ``config`` with every known, non-None override applied."""
    defaults = asdict(RunConfig())
    changes: Dict[str, Any] = {}
    for key, value in overrides.items():
        key = key.replace("-", "_")
        if key in defaults and value is not None:
            changes[key] = _coerce(key, value, defaults[key])
    return replace(config, **changes)


def load_config(path: Optional[Path] = None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
    return merge(RunConfig(), parse_config_text(text))


def save_config(config: RunConfig, path: Path) -> None:
    lines = [f"{item.name} = {getattr(config, item.name)}" for item in fields(config)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
