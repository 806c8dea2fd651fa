from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from sdmlab.attacks import AttackConfig, AttackConfigError
from sdmlab.data import Dataset, LabeledExample, make_synthetic_blobs
from sdmlab.harness import (
    CSV_HEADER,
    AttackSetting,
    BenchConfig,
    BenchConfigError,
    BenchReport,
    BenchRow,
    adversarial_train,
    cost_effectiveness_summary,
    diagnose,
    diagnose_logits,
    evaluate_error_rate,
    find_high_loss_pair,
    load_bench_config,
    reference_report,
    run_benchmark,
    search_high_loss_pair,
)
from sdmlab.net import Mlp, init_mlp, sgd_train
from sdmlab.tensor import softmax
from tests.conftest import HIGH_LOSS_PROBS, VICTIM_HIDDEN, VICTIM_TRAINING, zero_model

DESK_EPSILON = 0.1
DESK_CFG = AttackConfig(epsilon=DESK_EPSILON, alpha=DESK_EPSILON / 4)
NOISE = 0.005


def _small_bench(**overrides) -> BenchConfig:
    payload = {
        "dataset": "blobs:k=5,d=4,per_class=20,spread=0.1,seed=3",
        "seed": 1,
        "record_wall_time": False,
        "victims": [{"name": "plain", "hidden": [8], "epochs": 5, "lr": 0.3, "batch_size": 16}],
        "attacks": [
            {"name": "pgd", "epsilon": 0.1, "alpha_ratio": 0.25, "total_steps": [10, 20]},
            {"name": "sdm", "epsilon": 0.1, "alpha_ratio": 0.25, "total_steps": [10, 20]},
        ],
    }
    payload.update(overrides)
    return BenchConfig.model_validate(payload)


def test_clean_error_rate_all_correct() -> None:
    model = zero_model(2, 3, bias=[0.0, 1.0, 0.0])
    data = Dataset("twos", 3, np.full((4, 2), 0.5), np.full(4, 2))
    assert evaluate_error_rate(model, data) == 0.0


def test_zero_budget_attack_equals_clean_rate() -> None:
    data = make_synthetic_blobs(5, 4, 10, 0.2, seed=2)
    model = sgd_train(init_mlp([4, 6, 5], seed=2), data, lr=0.3, epochs=3, batch_size=8, seed=2)
    clean = evaluate_error_rate(model, data)
    for name in ("fgsm", "pgd", "sdm"):
        setting = AttackSetting(name, AttackConfig(epsilon=0.0), 10)
        assert evaluate_error_rate(model, data, setting) == clean
        assert evaluate_error_rate(model, data, setting, batch_size=7, use_best=True) == clean


def test_error_rate_dimension_mismatch() -> None:
    data = make_synthetic_blobs(3, 4, 5, 0.1, seed=0)
    with pytest.raises(ValueError):
        evaluate_error_rate(init_mlp([5, 3], seed=0), data)


def test_adversarial_training_with_zero_budget_is_plain_training() -> None:
    data = make_synthetic_blobs(5, 4, 10, 0.1, seed=5)
    dims = [4, 6, 5]
    for inner in ("pgd", "sdm"):
        robust = adversarial_train(
            data,
            dims,
            AttackSetting(inner, AttackConfig(epsilon=0.0), 10),
            epochs=2,
            lr=0.2,
            seed=7,
            batch_size=8,
        )
        assert robust == sgd_train(init_mlp(dims, 7), data, lr=0.2, epochs=2, batch_size=8, seed=7)


def test_adversarial_training_rejects_other_inner_attacks() -> None:
    data = make_synthetic_blobs(5, 4, 4, 0.1, seed=5)
    with pytest.raises(AttackConfigError):
        adversarial_train(data, [4, 5], AttackSetting("fgsm", AttackConfig()), epochs=1, lr=0.1, seed=0)


def test_benchmark_cross_product_and_csv(tmp_path: Path) -> None:
    report = run_benchmark(_small_bench(), out=tmp_path / "bench.csv")
    attack_rows = [row for row in report.rows if row.attack != "clean"]
    assert len(attack_rows) == 4
    assert {(row.attack, row.total_steps) for row in attack_rows} == {
        ("pgd", 10),
        ("pgd", 20),
        ("sdm", 10),
        ("sdm", 20),
    }
    assert all(0.0 <= row.error_rate <= 1.0 for row in report.rows)
    lines = (tmp_path / "bench.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 6
    assert report.metadata["model_digests"]["plain"]
    assert report.metadata["batch_size"] is None


def test_benchmark_rerun_is_byte_identical(tmp_path: Path) -> None:
    first = run_benchmark(_small_bench(), out=tmp_path / "a.csv")
    second = run_benchmark(_small_bench(workers=3), out=tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert first.to_csv() == second.to_csv()


def test_benchmark_run_log(tmp_path: Path) -> None:
    log = tmp_path / "runs" / "bench.jsonl"
    report = run_benchmark(_small_bench(run_log=log))
    records = [json.loads(line) for line in log.read_text(encoding="utf-8").splitlines()]
    assert len(records) == len(report.rows)
    assert {r["dataset"] for r in records} == {"blobs-k5-d4-s3"}
    assert all(r["model_digest"] == report.metadata["model_digests"]["plain"] for r in records)


def test_bench_config_from_toml(tmp_path: Path) -> None:
    path = tmp_path / "bench.toml"
    path.write_text(
        """
[bench]
dataset = "blobs:k=5,d=4,per_class=5"
mode = "cost"

[[bench.victims]]
defense = "sdm-at"
epochs = 1

[[bench.attacks]]
name = "sdm"
epsilon = [0.05, 0.1]
""",
        encoding="utf-8",
    )
    cfg = load_bench_config(path)
    assert cfg.mode == "cost"
    assert cfg.victims[0].label == "sdm-at"
    assert cfg.attacks[0].epsilon == [0.05, 0.1]
    assert cfg.cost_steps == [10, 20, 50, 100]


def test_bench_config_errors(tmp_path: Path) -> None:
    with pytest.raises(BenchConfigError):
        run_benchmark(_small_bench(attacks=[{"name": "apgd", "epsilon": 0.1}]))
    with pytest.raises(BenchConfigError):
        run_benchmark(_small_bench(victims=[{"name": "ghost", "model": str(tmp_path / "missing.sdmm")}]))
    path = tmp_path / "bad.toml"
    path.write_text('[bench]\ndataset = "blobs:"\nvictims = [{defense = "trades"}]\nattacks = [{name = "pgd", epsilon = 0.1}]\n')
    with pytest.raises(BenchConfigError):
        load_bench_config(path)
    with pytest.raises(BenchConfigError):
        load_bench_config(tmp_path / "absent.toml")


def test_cost_effectiveness_summary_flags_drops() -> None:
    rows = [
        BenchRow("none", "sdm", "linf", 0.1, 10, 0.50, 0.0, 0),
        BenchRow("none", "sdm", "linf", 0.1, 20, 0.52, 0.0, 0),
        BenchRow("none", "sdm", "linf", 0.1, 50, 0.518, 0.0, 0),
        BenchRow("none", "sdm", "linf", 0.1, 100, 0.40, 0.0, 0),
        BenchRow("none", "clean", "none", 0.0, 0, 0.05, 0.0, 0),
    ]
    violations = cost_effectiveness_summary(BenchReport(rows), tolerance=NOISE)
    assert [(v.total_steps, v.previous_best) for v in violations] == [(100, 0.52)]


def test_reference_report_rows() -> None:
    report = reference_report()
    first, second = report.rows
    for row, expected in zip(report.rows, HIGH_LOSS_PROBS):
        assert np.max(np.abs(row.probs - np.array(expected))) < 5e-4
        assert np.max(np.abs(row.probs - softmax(row.logits))) <= 1e-12
        assert abs(row.loss + math.log(row.probs[row.true_label - 1])) <= 1e-12
        assert row.predicted == int(np.argmax(row.logits)) + 1
    assert abs(first.loss - 1.196) < 1e-3
    assert abs(second.loss - 1.057) < 1e-3
    assert (first.predicted, second.predicted) == (4, 6)
    assert (first.result, second.result) == ("Failed", "Successful")
    assert report.high_loss_pair is not None
    assert report.high_loss_pair.failed is first
    assert report.high_loss_pair.successful is second


def test_find_high_loss_pair_requires_inversion() -> None:
    rows = [diagnose_logits([2.0, 0.0, 0.0], 1, "a"), diagnose_logits([0.0, 1.0, 0.0], 1, "b")]
    assert find_high_loss_pair(rows) is None
    assert find_high_loss_pair(rows[:1]) is None


def test_diagnose_zero_weight_model() -> None:
    model = zero_model(3, 4)
    example = LabeledExample(np.array([0.1, 0.5, 0.9]), 2)
    report = diagnose(model, example, [AttackSetting("pgd", AttackConfig(), 5), AttackSetting("sdm", AttackConfig(cycles=1, stages=4, steps=2))])
    assert [row.source for row in report.rows] == ["clean", "pgd", "sdm"]
    clean = report.rows[0]
    assert np.allclose(clean.probs, 0.25, atol=1e-15)
    assert clean.loss == pytest.approx(math.log(4), abs=1e-12)
    assert clean.predicted == 1
    assert len(report.candidates) == (1 + 5) + (1 + 8)
    assert all(row.source != "clean" for row in report.candidates)


@pytest.fixture(scope="module")
def desk(victim: Mlp, victim_data: tuple[Dataset, Dataset]) -> tuple[Mlp, Dataset, Dataset]:
    train, test = victim_data
    assert len(test) >= 500
    return victim, train, test


@pytest.mark.slow
@pytest.mark.parametrize("total", [10, 100])
def test_sdm_not_weaker_than_pgd(desk: tuple[Mlp, Dataset, Dataset], total: int) -> None:
    model, _, test = desk
    sdm_rate = evaluate_error_rate(model, test, AttackSetting("sdm", DESK_CFG, total))
    pgd_rate = evaluate_error_rate(model, test, AttackSetting("pgd", DESK_CFG, total))
    assert sdm_rate >= pgd_rate - NOISE
    assert pgd_rate >= evaluate_error_rate(model, test)


@pytest.mark.slow
def test_sdm_error_rate_grows_with_steps(desk: tuple[Mlp, Dataset, Dataset]) -> None:
    model, _, test = desk
    best = 0.0
    for total in (10, 20, 50, 100):
        rate = evaluate_error_rate(model, test, AttackSetting("sdm", DESK_CFG, total))
        assert rate >= best - NOISE
        best = max(best, rate)


@pytest.mark.slow
def test_sdm_adversarial_training_lowers_robust_error(desk: tuple[Mlp, Dataset, Dataset]) -> None:
    model, train, test = desk
    dims = [train.input_dim, *VICTIM_HIDDEN, train.num_classes]
    robust = adversarial_train(
        train,
        dims,
        AttackSetting("sdm", DESK_CFG, 10),
        epochs=VICTIM_TRAINING["epochs"],
        lr=VICTIM_TRAINING["lr"],
        seed=VICTIM_TRAINING["seed"],
        batch_size=VICTIM_TRAINING["batch_size"],
    )
    attack = AttackSetting("sdm", DESK_CFG, 100)
    assert evaluate_error_rate(robust, test, attack) < evaluate_error_rate(model, test, attack)


@pytest.mark.slow
def test_high_loss_pair_exists_on_victim(desk: tuple[Mlp, Dataset, Dataset]) -> None:
    model, _, test = desk
    found = search_high_loss_pair(model, test, [AttackSetting("pgd", DESK_CFG, 100), AttackSetting("sdm", DESK_CFG, 100)])
    assert found is not None
    _, pair = found
    assert not pair.failed.successful
    assert pair.successful.successful
    assert pair.failed.loss > pair.successful.loss
