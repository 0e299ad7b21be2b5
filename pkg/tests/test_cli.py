"""CLI-level tests."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from event_cmax import cli
from event_cmax.config import RunConfig, load_run_config
from event_cmax.writer import write_raster

SENSOR_CONFIG: dict[str, object] = {"synth": {"width": 64, "height": 48, "focal": 100.0, "density": 40.0, "rate": 2.0}}


def _synth(tmp_path: Path) -> Path:
    config_path: Path = tmp_path / "sensor.json"
    config_path.write_text(json.dumps(SENSOR_CONFIG), encoding="utf-8")
    dataset: Path = tmp_path / "dataset"
    exit_code: int = cli.main(
        [
            "synth",
            "--config",
            str(config_path),
            "--problem",
            "flow",
            "--v",
            "-40",
            "0",
            "--seed",
            "9",
            "--output",
            str(dataset),
            "--log-level",
            "ERROR",
        ]
    )
    assert exit_code == cli.EXIT_OK
    return dataset


def test_synth_writes_a_dataset_and_echoes_its_config(tmp_path: Path) -> None:
    dataset: Path = _synth(tmp_path)
    assert {"events.txt", "calib.txt", "gt.json", "run.json", "summary.json"} <= {
        path.name for path in dataset.iterdir()
    }
    truth: dict[str, object] = json.loads((dataset / "gt.json").read_text(encoding="utf-8"))
    assert truth["v"] == [-40.0, 0.0]
    assert truth["seed"] == 9

    # Flags override the config file and the merged result is written back.
    echoed: RunConfig = load_run_config(dataset / "run.json")
    assert echoed.synth.width == 64
    assert echoed.synth.seed == 9
    assert echoed.synth.velocity == [-40.0, 0.0]


def test_synth_runs_on_built_in_defaults_without_a_config_file(tmp_path: Path) -> None:
    output: Path = tmp_path / "plain"
    exit_code: int = cli.main(["synth", "--problem", "flow", "--output", str(output), "--log-level", "ERROR"])
    assert exit_code == cli.EXIT_OK
    echoed: RunConfig = load_run_config(output / "run.json")
    assert echoed.to_dict()["accumulation"] == RunConfig().accumulation.to_dict()
    assert (output / "events.txt").is_file()


@pytest.mark.parametrize(
    ("arguments", "message"),
    [
        (["--problem", "homography", "--plane-depth", "-1"], "The scene plane lies behind the camera."),
        (["--problem", "depth", "--plane-depth", "-0.5"], "The scene plane lies behind the camera."),
        (["--problem", "flow", "--rate", "-2"], "synth: Event rate must be positive, got -2.0."),
    ],
)
def test_invalid_synth_settings_write_nothing(
    tmp_path: Path, capsys: pytest.CaptureFixture[str], arguments: list[str], message: str
) -> None:
    output: Path = tmp_path / "out"
    exit_code: int = cli.main(["synth", *arguments, "--output", str(output), "--log-level", "ERROR"])
    assert exit_code == cli.EXIT_USAGE
    assert message in capsys.readouterr().err
    assert not output.exists()


def test_flow_on_a_generated_dataset(tmp_path: Path) -> None:
    dataset: Path = _synth(tmp_path)
    output: Path = tmp_path / "flow"
    exit_code: int = cli.main(
        [
            "flow",
            "--events",
            str(dataset / "events.txt"),
            "--calib",
            str(dataset / "calib.txt"),
            "--half-width",
            "60",
            "--steps",
            "7",
            "--threads",
            "2",
            "--output",
            str(output),
            "--log-level",
            "ERROR",
        ]
    )
    assert exit_code == cli.EXIT_OK
    for name in ("flow_estimate.csv", "heatmap.csv", "heatmap.png", "iwe_zero.png", "iwe_star.raw", "run.json"):
        assert (output / name).is_file()
    estimate: pd.DataFrame = pd.read_csv(output / "flow_estimate.csv")
    assert estimate.loc[0, "vx"] == pytest.approx(-40.0, abs=10.0)
    summary: dict[str, object] = json.loads((output / "summary.json").read_text(encoding="utf-8"))
    assert summary["command"] == "flow"
    assert summary["f_star"] >= estimate.loc[0, "f_zero"]


def test_missing_inputs_are_a_usage_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    exit_code: int = cli.main(["flow", "--output", str(tmp_path / "out"), "--log-level", "ERROR"])
    assert exit_code == cli.EXIT_USAGE
    assert "needs an input for 'events'" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_invalid_config_file_is_a_usage_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    config_path: Path = tmp_path / "bad.json"
    config_path.write_text(json.dumps({"synth": {"rate": "fast"}}), encoding="utf-8")
    exit_code: int = cli.main(["synth", "--config", str(config_path), "--output", str(tmp_path / "out")])
    assert exit_code == cli.EXIT_USAGE
    assert "must be a number" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_run_failures_exit_with_one(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    dataset: Path = _synth(tmp_path)
    exit_code: int = cli.main(
        [
            "flow",
            "--events",
            str(dataset / "events.txt"),
            "--calib",
            str(dataset / "calib.txt"),
            "--patch",
            "500",
            "500",
            "600",
            "600",
            "--output",
            str(tmp_path / "flow"),
            "--log-level",
            "ERROR",
        ]
    )
    assert exit_code == cli.EXIT_FAILURE
    assert "flow failed: Optical flow needs at least one event." in capsys.readouterr().err


def test_render_defaults_to_a_png_beside_the_raster(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    raster: Path = write_raster(tmp_path / "iwe.raw", np.arange(12.0).reshape(3, 4), kind="count")
    assert cli.main(["render", str(raster), "--log-level", "ERROR"]) == cli.EXIT_OK
    assert (tmp_path / "iwe.png").is_file()
    assert "Rendered" in capsys.readouterr().out

    pgm: Path = tmp_path / "iwe.pgm"
    assert cli.main(["render", str(raster), "--output", str(pgm), "--no-negative"]) == cli.EXIT_OK
    assert pgm.read_bytes().startswith(b"P5")


def test_render_of_a_corrupt_raster_fails(tmp_path: Path) -> None:
    raster: Path = tmp_path / "broken.raw"
    raster.write_bytes(b"not a raster")
    assert cli.main(["render", str(raster), "--log-level", "ERROR"]) == cli.EXIT_FAILURE
