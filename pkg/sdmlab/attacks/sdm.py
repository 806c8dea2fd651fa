"""逐阶段边距攻击（SDM）。

每个 cycle 依次运行 N 个 stage，每个 stage 做 T 步：
stage 1 以 −P_y 为目标，stage n ≥ 2 以 DPDR(n) 为目标。
stage 之间以最后一次迭代点 x'_T 作为下一 stage 的起点，cycle 之间不重置。
"""

from __future__ import annotations

from typing import Sequence

import numpy.typing as npt
import structlog

from sdmlab.attacks.base import AttackConfig, AttackConfigError, AttackOutcome
from sdmlab.attacks.engine import AttackState, finish, run_steps
from sdmlab.data.base import Dataset, LabeledExample, stack_examples
from sdmlab.losses.spec import LossSpec
from sdmlab.net.mlp import Mlp

logger = structlog.get_logger(__name__)


def stage_loss(stage: int, cfg: AttackConfig, first_stage_loss: LossSpec | None = None) -> LossSpec:
    if stage == 1:
        return first_stage_loss or LossSpec.neg_true_prob()
    return LossSpec.dpdr(stage, cfg.delta, cfg.zeta)


def sdm_batch(
    model: Mlp,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    cfg: AttackConfig,
    first_stage_loss: LossSpec | None = None,
) -> list[AttackOutcome]:
    if cfg.stages > model.num_classes:
        raise AttackConfigError(
            f"stages N={cfg.stages} 超过类别数 K={model.num_classes}（需要 N ≤ K）"
        )
    state = AttackState.start(model, x, y, cfg)
    x_cur = state.x
    for cycle in range(1, cfg.cycles + 1):
        for stage in range(1, cfg.stages + 1):
            loss = stage_loss(stage, cfg, first_stage_loss)
            logger.debug("sdm_stage", cycle=cycle, stage=stage, loss=loss.label, batch=len(state.y))
            x_cur = run_steps(model, state, x_cur, loss, cfg.steps, cycle=cycle, stage=stage)
    return finish(model, state, x_cur)


def sdm_attack(
    model: Mlp,
    examples: Dataset | Sequence[LabeledExample],
    cfg: AttackConfig,
) -> list[AttackOutcome]:
    """对整批样本运行 SDM；DPDR 的 δ 在整批上共享。"""

    if isinstance(examples, Dataset):
        x, y = examples.inputs, examples.labels
    else:
        x, y = stack_examples(examples)
    return sdm_batch(model, x, y, cfg)
