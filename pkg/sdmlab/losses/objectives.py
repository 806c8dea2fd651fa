"""攻击所上升的标量目标：交叉熵、真实标签负概率与朴素概率差。

标签在所有公共接口上均为 1 起始（1..K）；仅在 numpy 内部转换为 0 起始下标。
并列情况一律取下标最小者。
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from sdmlab.tensor.ops import Logits, ProbVector, Tensor, freeze

LabelArray = npt.NDArray[np.int64]


class LossConfigError(ValueError):
    """损失参数非法（标签越界、阶数越界、未知损失等）。"""


def label_index(y: int, num_classes: int) -> int:
    """1 起始标签 → 0 起始下标。"""

    if not 1 <= int(y) <= num_classes:
        raise LossConfigError(f"标签 {y} 超出范围 1..{num_classes}")
    return int(y) - 1


def label_indices(labels: npt.ArrayLike, num_classes: int) -> LabelArray:
    """批量版本的 label_index。"""

    array = np.asarray(labels, dtype=np.int64).reshape(-1)
    if array.size and (array.min() < 1 or array.max() > num_classes):
        raise LossConfigError(f"标签超出范围 1..{num_classes}: {array.min()}..{array.max()}")
    return array - 1


def runner_up_indices(probs: ProbVector, y_idx: LabelArray) -> LabelArray:
    """τ = argmax{P_k | k ≠ y}（0 起始）。"""

    masked = np.array(probs, dtype=np.float64, copy=True)
    masked[np.arange(masked.shape[0]), y_idx] = -np.inf
    return np.argmax(masked, axis=1)


def descending_order(probs: ProbVector) -> LabelArray:
    """每行按概率降序排列的下标；并列时保留较小下标在前。"""

    return np.argsort(-probs, axis=-1, kind="stable")


def cross_entropy(probs: ProbVector, y: int) -> float:
    """−ln P_y。"""

    idx = label_index(y, probs.shape[-1])
    return float(-np.log(probs[idx]))


def neg_true_prob(probs: ProbVector, y: int) -> float:
    """L_y = −P_y。"""

    idx = label_index(y, probs.shape[-1])
    return float(-probs[idx])


def runner_up_label(probs: ProbVector, y: int) -> int:
    idx = label_index(y, probs.shape[-1])
    return int(runner_up_indices(probs.reshape(1, -1), np.array([idx]))[0]) + 1


def prob_diff(probs: ProbVector, y: int) -> float:
    """P_τ − P_y。"""

    if probs.shape[-1] < 3:
        raise LossConfigError(f"概率差目标要求 K ≥ 3，实际 K={probs.shape[-1]}")
    idx = label_index(y, probs.shape[-1])
    tau = runner_up_label(probs, y) - 1
    return float(probs[tau] - probs[idx])


def prob_diffs(probs: ProbVector, y_idx: LabelArray) -> Tensor:
    rows = np.arange(probs.shape[0])
    tau = runner_up_indices(probs, y_idx)
    return freeze(probs[rows, tau] - probs[rows, y_idx])


def predicted_label(logits: Logits) -> int:
    """最大 logit 对应的 1 起始标签。"""

    return int(np.argmax(logits)) + 1


def predicted_labels(logits: Logits) -> LabelArray:
    """逐行最大 logit 的 1 起始标签（并列取最小下标）。"""

    return np.argmax(logits, axis=-1).astype(np.int64) + 1
