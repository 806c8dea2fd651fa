"""对抗训练：每个小批量先被内层攻击替换，再做一次 SGD 更新。"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import structlog

from sdmlab.attacks.base import AttackConfigError
from sdmlab.attacks.registry import AttackRegistry, get_registry
from sdmlab.data.base import Dataset
from sdmlab.harness.evaluate import AttackSetting
from sdmlab.losses.objectives import LabelArray
from sdmlab.net.mlp import Mlp, ModelShapeError, init_mlp
from sdmlab.net.train import train_loop
from sdmlab.tensor.ops import Tensor, freeze

logger = structlog.get_logger(__name__)

INNER_ATTACKS = ("pgd", "sdm")
INNER_TOTAL_STEPS = 10


def adversarial_train(
    dataset: Dataset,
    layer_dims: Sequence[int],
    inner: AttackSetting,
    *,
    epochs: int,
    lr: float,
    seed: int,
    batch_size: int = 32,
    registry: AttackRegistry | None = None,
) -> Mlp:
    if inner.name not in INNER_ATTACKS:
        raise AttackConfigError(f"内层攻击只支持 {INNER_ATTACKS}: {inner.name!r}")
    dims = list(layer_dims)
    if dims[0] != dataset.input_dim or dims[-1] < dataset.num_classes:
        raise ModelShapeError(f"网络结构 {dims} 与数据集 (d={dataset.input_dim}, K={dataset.num_classes}) 不匹配")
    registry = registry or get_registry()

    def attacked_batch(model: Mlp, xb: Tensor, yb: LabelArray) -> Tensor:
        outcomes = registry.run(inner.name, model, xb, yb, inner.cfg, inner.total_steps)
        return freeze(np.stack([outcome.x_adv for outcome in outcomes]))

    logger.info(
        "adversarial_train_start",
        dataset=dataset.name,
        inner=inner.name,
        norm=inner.cfg.norm.value,
        epsilon=inner.cfg.epsilon,
        total_steps=inner.steps,
        epochs=epochs,
    )
    return train_loop(
        init_mlp(dims, seed),
        dataset.inputs,
        dataset.labels,
        lr=lr,
        epochs=epochs,
        batch_size=batch_size,
        seed=seed,
        batch_hook=attacked_batch,
    )
