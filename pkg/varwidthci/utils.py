from __future__ import annotations

import hashlib
import math
import re
from pathlib import Path
from typing import List, Sequence

import numpy as np


TOKEN_SPLIT_RE = re.compile(r"[\s,;]+")
RANGE_RE = re.compile(r"^\s*([^:]+):([^:]+):([^:]+)\s*$")


class InputParseError(ValueError):
    pass


def tokenize_input(raw: str) -> List[str]:
    return [token for token in TOKEN_SPLIT_RE.split(raw.strip()) if token]


def arange_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Equally spaced grid from start to stop inclusive with spacing <= step."""
    if not step > 0:
        raise ValueError("Grid step must be > 0")
    if stop < start:
        raise ValueError(f"Grid stop {stop} is below start {start}")
    if stop == start:
        return np.array([float(start)])
    count = max(1, math.ceil((stop - start) / step - 1e-9))
    return np.linspace(start, stop, count + 1)


def refine_grid(grid: Sequence[float]) -> np.ndarray:
    """Insert the midpoint of every gap (2x refinement)."""
    values = np.sort(np.asarray(grid, dtype=float))
    if values.size < 2:
        return values
    refined = np.empty(2 * values.size - 1)
    refined[0::2] = values
    refined[1::2] = 0.5 * (values[:-1] + values[1:])
    return refined


def parse_float_list(raw: str) -> List[float]:
    """Comma/space separated numbers, or a single ``start:stop:step`` range."""
    match = RANGE_RE.match(raw)
    if match:
        try:
            start, stop, step = (float(part) for part in match.groups())
            return [float(v) for v in arange_grid(start, stop, step)]
        except ValueError as exc:
            raise InputParseError(f"Illegal range: {raw}") from exc

    tokens = tokenize_input(raw)
    if not tokens:
        raise InputParseError("Input is empty")
    values: List[float] = []
    for token in tokens:
        try:
            value = float(token)
        except ValueError as exc:
            raise InputParseError(f"Illegal number: {token}") from exc
        if not math.isfinite(value):
            raise InputParseError(f"Number must be finite: {token}")
        values.append(value)
    return values


def parse_int_list(raw: str) -> List[int]:
    values: List[int] = []
    for token in tokenize_input(raw):
        try:
            # accepts 1e4 style
            value = float(token)
        except ValueError as exc:
            raise InputParseError(f"Illegal integer: {token}") from exc
        if not value.is_integer():
            raise InputParseError(f"Illegal integer: {token}")
        values.append(int(value))
    if not values:
        raise InputParseError("Input is empty")
    return values


def format_float(value: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(value), ".17g")


def safe_filename(name: str, default: str = "output") -> str:
    name = re.sub(r"[\\/:*?\"<>|]", "_", name)
    name = name.strip()
    return name or default


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
