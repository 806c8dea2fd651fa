from __future__ import annotations

from pathlib import Path

import pytest
from typer.testing import CliRunner

from sdmlab import get_version
from sdmlab.cli import app
from sdmlab.core import config as config_module
from sdmlab.core.config import ConfigLoader
from sdmlab.harness import CSV_HEADER

runner = CliRunner()

DATASET = "blobs:k=5,d=3,per_class=12,spread=0.1,seed=2"


def test_version() -> None:
    result = runner.invoke(app, ["version"])
    assert result.exit_code == 0
    assert get_version() in result.output


def test_schedule_table() -> None:
    result = runner.invoke(app, ["schedule"])
    assert result.exit_code == 0
    rows = [line.split() for line in result.output.splitlines()[1:]]
    assert ["100", "2", "5", "10"] in rows
    assert ["1000", "5", "5", "40"] in rows
    assert len(rows) == 7


def test_diagnose_reference_rows() -> None:
    result = runner.invoke(app, ["diagnose"])
    assert result.exit_code == 0
    assert "x'(1)" in result.output
    assert "pred=4 y=4 Failed" in result.output
    assert "pred=6 y=4 Successful" in result.output


def test_train_then_attack_writes_csv(tmp_path: Path) -> None:
    model = tmp_path / "victim.sdmm"
    trained = runner.invoke(
        app,
        ["train", "-d", DATASET, "-m", str(model), "--hidden", "6", "--epochs", "3", "--lr", "0.3", "--batch-size", "8"],
    )
    assert trained.exit_code == 0, trained.output
    assert model.exists()

    out = tmp_path / "attack.csv"
    attacked = runner.invoke(
        app,
        ["attack", "-m", str(model), "-d", DATASET, "-a", "sdm", "--total-steps", "20", "--eps", "0.1", "-o", str(out)],
    )
    assert attacked.exit_code == 0, attacked.output
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert {line.split(",")[1] for line in lines[1:]} == {"clean", "sdm"}


def test_attack_errors_exit_with_code_one(tmp_path: Path) -> None:
    missing = runner.invoke(app, ["attack", "-m", str(tmp_path / "missing.sdmm"), "-d", DATASET])
    assert missing.exit_code == 1

    model = tmp_path / "victim.sdmm"
    runner.invoke(app, ["train", "-d", DATASET, "-m", str(model), "--hidden", "4", "--epochs", "1"])
    unknown = runner.invoke(app, ["attack", "-m", str(model), "-d", DATASET, "-a", "apgd"])
    assert unknown.exit_code == 1
    assert "apgd" in unknown.output


def test_unknown_log_level() -> None:
    result = runner.invoke(app, ["--log-level", "chatty", "version"])
    assert result.exit_code == 1


def test_config_events_stay_off_stdout(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    (tmp_path / "config").mkdir()
    (tmp_path / "config" / "sdmlab.toml").write_text('[logging]\nlevel = "DEBUG"\n')
    monkeypatch.setattr(config_module, "config_loader", ConfigLoader(base_dir=tmp_path))

    result = runner.invoke(app, ["schedule"])
    assert result.exit_code == 0, result.output
    assert result.stdout.splitlines()[0].split() == ["total", "C", "N", "T"]
    assert "config_loaded" not in result.stdout


def test_split_seed_is_independent_of_attack_seed(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    import sdmlab.cli as cli

    seen: list[int] = []
    original = cli._load_split

    def recording_split(dataset: str, test_fraction: float, seed: int):
        seen.append(seed)
        return original(dataset, test_fraction, seed)

    monkeypatch.setattr(cli, "_load_split", recording_split)
    model = tmp_path / "victim.sdmm"
    trained = runner.invoke(app, ["train", "-d", DATASET, "-m", str(model), "--epochs", "1", "--seed", "3"])
    assert trained.exit_code == 0, trained.output
    attacked = runner.invoke(
        app,
        ["attack", "-m", str(model), "-d", DATASET, "-a", "fgsm", "--eps", "0.1", "--seed", "9", "-o", str(tmp_path / "a.csv")],
    )
    assert attacked.exit_code == 0, attacked.output
    moved = runner.invoke(
        app,
        ["attack", "-m", str(model), "-d", DATASET, "-a", "fgsm", "--eps", "0.1", "--split-seed", "4", "-o", str(tmp_path / "b.csv")],
    )
    assert moved.exit_code == 0, moved.output

    assert seen == [0, 0, 4]
