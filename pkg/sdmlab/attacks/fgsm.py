"""FGSM：一次大小为 ε 的 ℓ∞ 符号梯度步（交叉熵）。"""

from __future__ import annotations

from dataclasses import replace

import numpy.typing as npt

from sdmlab.attacks.base import AttackConfig, AttackOutcome, Norm
from sdmlab.attacks.pgd import pgd_batch
from sdmlab.data.base import LabeledExample
from sdmlab.net.mlp import Mlp
from sdmlab.tensor.ops import freeze


def _single_step(cfg: AttackConfig) -> AttackConfig:
    # ε = 0 时 α 取任意正数，clamp 仍把扰动压到 0
    alpha = cfg.epsilon if cfg.epsilon > 0 else 1.0
    return replace(cfg, norm=Norm.LINF, alpha=alpha, random_start=False)


def fgsm_batch(model: Mlp, x: npt.ArrayLike, y: npt.ArrayLike, cfg: AttackConfig) -> list[AttackOutcome]:
    return pgd_batch(model, x, y, _single_step(cfg), total_steps=1)


def fgsm(model: Mlp, example: LabeledExample, cfg: AttackConfig) -> AttackOutcome:
    return fgsm_batch(model, freeze(example.x.reshape(1, -1)), [example.y], cfg)[0]
