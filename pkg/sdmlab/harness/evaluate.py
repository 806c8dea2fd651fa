"""错误率评估：干净输入或被攻击后的输入上 predicted ≠ y 的比例。"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sdmlab.attacks.base import AttackConfig, AttackOutcome
from sdmlab.attacks.registry import AttackRegistry, get_registry
from sdmlab.data.base import Dataset
from sdmlab.losses.objectives import predicted_labels
from sdmlab.net.mlp import Mlp, ModelShapeError, forward_logits


@dataclass(frozen=True)
class AttackSetting:
    """一次评估所用的攻击：注册名、配置与总步数（None 表示沿用配置的 C·N·T）。"""

    name: str
    cfg: AttackConfig
    total_steps: int | None = None

    @property
    def steps(self) -> int:
        if self.name == "fgsm":
            return 1
        return self.total_steps if self.total_steps is not None else self.cfg.total_steps


def check_compatible(model: Mlp, dataset: Dataset) -> None:
    if dataset.input_dim != model.input_dim:
        raise ModelShapeError(f"数据维度 d={dataset.input_dim} 与模型输入维度 {model.input_dim} 不一致")
    if dataset.num_classes > model.num_classes:
        raise ModelShapeError(f"数据类别数 K={dataset.num_classes} 超过模型输出 {model.num_classes}")


def _batches(count: int, batch_size: int | None) -> list[slice]:
    size = count if not batch_size else batch_size
    if size < 1:
        raise ValueError(f"batch_size 必须 ≥ 1: {batch_size}")
    return [slice(start, min(start + size, count)) for start in range(0, count, size)]


def attack_dataset(
    model: Mlp,
    dataset: Dataset,
    attack: AttackSetting,
    *,
    batch_size: int | None = None,
    registry: AttackRegistry | None = None,
) -> list[AttackOutcome]:
    """按批运行攻击；默认整个数据集为一批（DPDR 的 δ 在批内共享）。"""

    check_compatible(model, dataset)
    registry = registry or get_registry()
    outcomes: list[AttackOutcome] = []
    for part in _batches(len(dataset), batch_size):
        outcomes.extend(
            registry.run(
                attack.name,
                model,
                dataset.inputs[part],
                dataset.labels[part],
                attack.cfg,
                attack.total_steps,
            )
        )
    return outcomes


def evaluate_error_rate(
    model: Mlp,
    dataset: Dataset,
    attack: AttackSetting | None = None,
    *,
    batch_size: int | None = None,
    use_best: bool = False,
    registry: AttackRegistry | None = None,
) -> float:
    check_compatible(model, dataset)
    if attack is None:
        predicted = predicted_labels(forward_logits(model, dataset.inputs))
        return float(np.mean(predicted != dataset.labels))
    outcomes = attack_dataset(model, dataset, attack, batch_size=batch_size, registry=registry)
    return sum(outcome.fooled(use_best) for outcome in outcomes) / len(outcomes)
