"""Tests for locating run output directories."""

from __future__ import annotations

from datetime import datetime
from pathlib import Path

import pytest

import event_cmax.output_paths as output_paths


def test_output_root_prefers_env(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.setenv(output_paths.OUTPUT_ROOT_VARIABLE, f"  {tmp_path}  ")
    assert output_paths.resolve_output_root() == tmp_path


def test_blank_env_falls_back_to_runs(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv(output_paths.OUTPUT_ROOT_VARIABLE, "   ")
    assert output_paths.resolve_output_root() == Path("runs")
    monkeypatch.delenv(output_paths.OUTPUT_ROOT_VARIABLE)
    assert output_paths.resolve_output_root() == output_paths.DEFAULT_OUTPUT_ROOT


def test_run_directories_are_stamped(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.setenv(output_paths.OUTPUT_ROOT_VARIABLE, str(tmp_path))
    stamp: datetime = datetime(2024, 3, 9, 14, 5, 7)
    assert output_paths.default_run_directory("rotate", now=stamp) == tmp_path / "rotate-20240309-140507"
