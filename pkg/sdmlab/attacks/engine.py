"""攻击共用的迭代核心：符号梯度/归一化梯度步、最优迭代跟踪与逐步轨迹。"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from sdmlab.attacks.base import AttackConfig, AttackError, AttackOutcome, StepRecord
from sdmlab.attacks.step import check_budget, step_update
from sdmlab.losses.objectives import label_indices, predicted_labels, runner_up_indices
from sdmlab.losses.spec import LossSpec
from sdmlab.net.mlp import Mlp, ModelShapeError, evaluate_loss, forward_logits
from sdmlab.tensor.ops import Tensor, freeze, softmax


@dataclass
class AttackState:
    """一批样本的攻击状态。"""

    x: Tensor
    y: npt.NDArray[np.int64]
    cfg: AttackConfig
    best_x: np.ndarray
    best_margin: np.ndarray
    best_predicted: np.ndarray
    traces: list[list[StepRecord]]
    steps_used: int = 0

    @classmethod
    def start(cls, model: Mlp, x: npt.ArrayLike, y: npt.ArrayLike, cfg: AttackConfig) -> AttackState:
        batch = np.asarray(x, dtype=np.float64)
        if batch.ndim != 2 or batch.shape[0] == 0:
            raise ModelShapeError(f"攻击输入需要非空批次 [B, d]，实际 {batch.shape}")
        labels = np.asarray(y, dtype=np.int64).reshape(-1)
        if labels.shape[0] != batch.shape[0]:
            raise ModelShapeError(f"标签数 {labels.shape[0]} 与批大小 {batch.shape[0]} 不一致")
        label_indices(labels, model.num_classes)
        return cls(
            x=freeze(batch.copy()),
            y=labels,
            cfg=cfg,
            best_x=batch.copy(),
            best_margin=np.full(batch.shape[0], -np.inf),
            best_predicted=labels.copy(),
            traces=[[] for _ in range(batch.shape[0])],
        )

    def observe(self, x_cur: Tensor, probs: Tensor, logits: Tensor) -> np.ndarray:
        """记录一个访问到的迭代点并更新最优点；返回每行的 P_τ − P_y。"""

        rows = np.arange(x_cur.shape[0])
        y_idx = self.y - 1
        tau = runner_up_indices(probs, y_idx)
        margins = probs[rows, tau] - probs[rows, y_idx]
        if self.cfg.track_best:
            better = margins > self.best_margin
            self.best_x[better] = x_cur[better]
            self.best_margin[better] = margins[better]
            self.best_predicted[better] = predicted_labels(logits[better])
        return margins

    def record(
        self,
        cycle: int,
        stage: int,
        step: int,
        x_cur: Tensor,
        probs: Tensor,
        logits: Tensor,
        values: Tensor,
    ) -> None:
        if not self.cfg.record_trace:
            return
        y_idx = self.y - 1
        tau = runner_up_indices(probs, y_idx)
        predicted = predicted_labels(logits)
        for i in range(x_cur.shape[0]):
            self.traces[i].append(
                StepRecord(
                    cycle=cycle,
                    stage=stage,
                    step=step,
                    loss=float(values[i]),
                    p_true=float(probs[i, y_idx[i]]),
                    p_tau=float(probs[i, tau[i]]),
                    predicted=int(predicted[i]),
                    x=freeze(np.array(x_cur[i], copy=True)),
                )
            )


def run_steps(
    model: Mlp,
    state: AttackState,
    x_cur: Tensor,
    loss: LossSpec,
    steps: int,
    *,
    cycle: int = 1,
    stage: int = 1,
) -> Tensor:
    """以 loss 为目标做 steps 次梯度上升步；每步前观察当前迭代点。"""

    for t in range(1, steps + 1):
        evaluation = evaluate_loss(model, x_cur, state.y, loss)
        if not (np.all(np.isfinite(evaluation.values)) and np.all(np.isfinite(evaluation.input_grad))):
            raise AttackError(f"{loss.label} 损失或梯度非有限", cycle=cycle, stage=stage, step=t)
        state.observe(x_cur, evaluation.probs, evaluation.logits)
        state.record(cycle, stage, t, x_cur, evaluation.probs, evaluation.logits, evaluation.values)
        x_cur = step_update(state.x, x_cur, evaluation.input_grad, state.cfg)
        state.steps_used += 1
    return x_cur


def finish(model: Mlp, state: AttackState, x_adv: Tensor) -> list[AttackOutcome]:
    """观察最终迭代点、校验预算并组装每个样本的结果。"""

    logits = np.atleast_2d(forward_logits(model, x_adv))
    probs = softmax(logits)
    final_margins = state.observe(x_adv, probs, logits)
    check_budget(state.x, x_adv, state.cfg)
    if state.cfg.track_best:
        check_budget(state.x, state.best_x, state.cfg)
        best_x = state.best_x
        best_margin = state.best_margin
        best_predicted = state.best_predicted
    else:
        best_x = np.array(x_adv, copy=True)
        best_margin = final_margins
        best_predicted = predicted_labels(logits)
    predicted = predicted_labels(logits)

    outcomes = []
    for i in range(x_adv.shape[0]):
        outcomes.append(
            AttackOutcome(
                x=state.x[i],
                y=int(state.y[i]),
                x_adv=freeze(np.array(x_adv[i], copy=True)),
                predicted=int(predicted[i]),
                success=bool(predicted[i] != state.y[i]),
                steps_used=state.steps_used,
                best_x=freeze(np.array(best_x[i], copy=True)),
                best_margin=float(best_margin[i]),
                best_predicted=int(best_predicted[i]),
                trace=state.traces[i],
            )
        )
    return outcomes
