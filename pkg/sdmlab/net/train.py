"""普通小批量 SGD 训练（交叉熵），用于产生桌面规模的受害模型。"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import numpy.typing as npt
import structlog

from sdmlab.data.base import Dataset, LabeledExample, stack_examples
from sdmlab.losses.objectives import LabelArray, label_indices
from sdmlab.losses.spec import LossSpec
from sdmlab.net.mlp import Mlp, ModelShapeError, backward, forward_cache
from sdmlab.tensor.ops import Tensor

logger = structlog.get_logger(__name__)

# (当前模型, 批输入, 1 起始标签) -> 替换后的批输入
BatchHook = Callable[[Mlp, Tensor, LabelArray], Tensor]

_CE = LossSpec.ce()


class TrainingError(RuntimeError):
    """训练过程中出现非有限损失。"""

    def __init__(self, message: str, *, epoch: int, batch: int) -> None:
        super().__init__(f"{message} (epoch={epoch}, batch={batch})")
        self.epoch = epoch
        self.batch = batch


def sgd_train(
    model: Mlp,
    data: Dataset | Sequence[LabeledExample],
    lr: float,
    epochs: int,
    batch_size: int,
    seed: int,
) -> Mlp:
    """返回训练后的新模型；给定种子时完全确定。"""

    x, y = _training_arrays(data)
    return train_loop(model, x, y, lr=lr, epochs=epochs, batch_size=batch_size, seed=seed)


def _training_arrays(data: Dataset | Sequence[LabeledExample]) -> tuple[Tensor, LabelArray]:
    if isinstance(data, Dataset):
        return data.inputs, data.labels
    if not data:
        raise ValueError("训练数据为空")
    return stack_examples(data)


def train_loop(
    model: Mlp,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    *,
    lr: float,
    epochs: int,
    batch_size: int,
    seed: int,
    batch_hook: BatchHook | None = None,
) -> Mlp:
    """共享训练循环；``batch_hook`` 可在每次 SGD 更新前替换批输入（对抗训练）。"""

    inputs = np.asarray(x, dtype=np.float64)
    labels = np.asarray(y, dtype=np.int64)
    if inputs.shape[0] == 0:
        raise ValueError("训练数据为空")
    if inputs.ndim != 2 or inputs.shape[1] != model.input_dim:
        raise ModelShapeError(f"训练输入形状 {inputs.shape} 与模型输入维度 {model.input_dim} 不一致")
    if lr < 0 or epochs < 0 or batch_size < 1:
        raise ValueError(f"非法训练参数: lr={lr}, epochs={epochs}, batch_size={batch_size}")
    y_idx = label_indices(labels, model.num_classes)

    weights = [np.array(w, copy=True) for w in model.weights]
    biases = [np.array(b, copy=True) for b in model.biases]
    rng = np.random.default_rng(seed)
    count = inputs.shape[0]

    for epoch in range(epochs):
        order = rng.permutation(count)
        epoch_loss = 0.0
        correct = 0
        for batch_no, start in enumerate(range(0, count, batch_size)):
            idx = order[start : start + batch_size]
            current = Mlp(tuple(weights), tuple(biases))
            xb = inputs[idx]
            if batch_hook is not None:
                xb = batch_hook(current, xb, labels[idx])
            cache = forward_cache(current, xb)
            plan = _CE.plan(cache.logits, y_idx[idx])
            values = plan.values(cache.logits)
            if not np.all(np.isfinite(values)):
                raise TrainingError("训练损失出现非有限值", epoch=epoch, batch=batch_no)
            grads = backward(current, cache, plan.logit_grad(cache.logits) / len(idx), with_params=True)
            for i in range(len(weights)):
                weights[i] = weights[i] - lr * grads.weights[i]
                biases[i] = biases[i] - lr * grads.biases[i]
            if not all(np.all(np.isfinite(p)) for p in (*weights, *biases)):
                raise TrainingError("参数更新后出现非有限值", epoch=epoch, batch=batch_no)
            epoch_loss += float(np.sum(values))
            correct += int(np.sum(np.argmax(cache.logits, axis=1) == y_idx[idx]))
        logger.debug(
            "train_epoch",
            epoch=epoch,
            loss=epoch_loss / count,
            accuracy=correct / count,
            adversarial=batch_hook is not None,
        )

    return Mlp(tuple(weights), tuple(biases))
