"""Bit-stable report emission: canonical JSON and 17-digit CSV, atomic writes.

Reports never embed timestamps, hostnames, or other run-varying data; given
the same resolved config and seed, every byte is reproducible.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

ARTIFACT_NAME = "nilsphere"


def artifact_version() -> str:
    from . import __version__

    return __version__


def report_envelope(command: str, config: dict) -> dict:
    """Common header embedded in every report."""
    return {
        "artifact": {"name": ARTIFACT_NAME, "version": artifact_version()},
        "command": command,
        "config": config,
    }


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _plain(value):
    """Reduce numpy scalars/arrays to builtin types for canonical JSON."""
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def write_json(path, payload: dict) -> None:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    text = json.dumps(
        payload, sort_keys=True, indent=2, allow_nan=False, default=_plain
    )
    _atomic_write_text(Path(path), text + "\n")


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def write_csv(path, header: list[str], rows) -> None:
    """CSV with mandatory header; floats at 17 significant digits."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")
