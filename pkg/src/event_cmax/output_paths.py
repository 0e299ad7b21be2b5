"""Helpers for locating the directory that run outputs are written under."""

from __future__ import annotations

import os
from datetime import datetime
from pathlib import Path

OUTPUT_ROOT_VARIABLE: str = "EVENT_CMAX_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT: Path = Path("runs")


def resolve_output_root() -> Path:
    """
    Resolve the default output root.

    The resolution order is:
    1. The `EVENT_CMAX_OUTPUT_ROOT` environment variable.
    2. `./runs` relative to the working directory.
    """
    env: str | None = os.environ.get(OUTPUT_ROOT_VARIABLE)
    if env and env.strip():
        return Path(env.strip()).expanduser()
    return DEFAULT_OUTPUT_ROOT


def default_run_directory(command: str, *, now: datetime | None = None) -> Path:
    """`<output root>/<command>-<YYYYmmdd-HHMMSS>` for runs started without `--output`."""
    stamp: str = (now or datetime.now()).strftime("%Y%m%d-%H%M%S")
    return resolve_output_root() / f"{command}-{stamp}"


__all__: list[str] = [
    "DEFAULT_OUTPUT_ROOT",
    "OUTPUT_ROOT_VARIABLE",
    "default_run_directory",
    "resolve_output_root",
]
