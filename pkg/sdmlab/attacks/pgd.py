"""PGD 基线：从 x'_0 = x 出发（可选随机起点）沿目标函数梯度上升。"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from sdmlab.attacks.base import AttackConfig, AttackConfigError, AttackOutcome
from sdmlab.attacks.engine import AttackState, finish, run_steps
from sdmlab.attacks.step import random_start
from sdmlab.data.base import LabeledExample
from sdmlab.losses.spec import LossSpec
from sdmlab.net.mlp import Mlp
from sdmlab.tensor.ops import freeze


def pgd_batch(
    model: Mlp,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    cfg: AttackConfig,
    total_steps: int,
    loss: LossSpec | None = None,
) -> list[AttackOutcome]:
    if total_steps < 1:
        raise AttackConfigError(f"total_steps 必须 ≥ 1: {total_steps}")
    loss = loss or LossSpec.ce()
    state = AttackState.start(model, x, y, cfg)
    x_cur = state.x
    if cfg.random_start:
        x_cur = random_start(state.x, cfg, np.random.default_rng(cfg.seed))
    x_cur = run_steps(model, state, x_cur, loss, total_steps)
    return finish(model, state, x_cur)


def pgd(model: Mlp, example: LabeledExample, cfg: AttackConfig, total_steps: int) -> AttackOutcome:
    return pgd_batch(model, freeze(example.x.reshape(1, -1)), [example.y], cfg, total_steps)[0]
