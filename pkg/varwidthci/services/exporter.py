from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import Callable, Iterable, List

from .. import __version__
from ..config import RunConfig
from ..models import OutputPayload
from ..utils import file_sha256, safe_filename


MANIFEST_SUFFIX = ".manifest.json"


def export_payloads(
    payloads: Iterable[OutputPayload],
    output_dir: Path,
    log: Callable[[str], None],
) -> List[Path]:
    output_dir.mkdir(parents=True, exist_ok=True)
    exported: List[Path] = []
    for payload in payloads:
        path = output_dir / safe_filename(payload.filename)
        # newline="" keeps the CRLF row ends of CSV payloads byte-exact
        with path.open("w", encoding=payload.encoding, newline="") as handle:
            handle.write(payload.content)
        exported.append(path)
        if payload.summary:
            log(f"Saved {path.name}: {payload.summary}")
        else:
            log(f"Saved {path.name}")
    return exported


def manifest_path(primary: Path) -> Path:
    return primary.with_name(primary.name + MANIFEST_SUFFIX)


def write_manifest(
    primary: Path,
    artifacts: Iterable[Path],
    config: RunConfig,
    log: Callable[[str], None],
) -> Path:
    """Effective config plus SHA-256 of every artifact, next to ``primary``."""
    document = {
        "version": __version__,
        "command": config.command,
        "config": asdict(config),
        "artifacts": [
            {"file": path.name, "sha256": file_sha256(path)} for path in artifacts
        ],
    }
    path = manifest_path(primary)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(json.dumps(document, indent=2, sort_keys=True) + "\n")
    log(f"Saved {path.name}")
    return path
