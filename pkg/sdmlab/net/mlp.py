"""前馈分类器 f（参数 θ）：前向 logits 与精确的输入梯度。

隐藏层之间使用 ReLU，输出层为恒等映射。模型构造后不可变，可在线程间共享只读使用。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt

from sdmlab.losses.objectives import label_indices
from sdmlab.losses.spec import LossPlan, LossSpec
from sdmlab.tensor.ops import (
    Logits,
    Tensor,
    affine_forward,
    affine_input_grad,
    as_tensor,
    freeze,
    relu_forward,
    relu_input_grad,
    softmax,
)

MIN_CLASSES = 3


class ModelShapeError(ValueError):
    """模型结构或输入维度不合法。"""


@dataclass(frozen=True, eq=False)
class Mlp:
    weights: tuple[Tensor, ...]
    biases: tuple[Tensor, ...]

    def __post_init__(self) -> None:
        if not self.weights or len(self.weights) != len(self.biases):
            raise ModelShapeError(
                f"权重与偏置层数不一致: {len(self.weights)} vs {len(self.biases)}"
            )
        weights = tuple(as_tensor(w, ndim=2, name=f"W{i}") for i, w in enumerate(self.weights))
        biases = tuple(as_tensor(b, ndim=1, name=f"b{i}") for i, b in enumerate(self.biases))
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.shape[1] != b.shape[0]:
                raise ModelShapeError(f"第 {i} 层 W{w.shape} 与 b{b.shape} 不一致")
            if i and weights[i - 1].shape[1] != w.shape[0]:
                raise ModelShapeError(f"第 {i} 层输入维度 {w.shape[0]} 与上一层输出不一致")
        if weights[0].shape[0] < 1:
            raise ModelShapeError("输入维度 d 必须 ≥ 1")
        if weights[-1].shape[1] < MIN_CLASSES:
            raise ModelShapeError(f"类别数 K 必须 ≥ {MIN_CLASSES}，实际 {weights[-1].shape[1]}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def layer_dims(self) -> list[int]:
        return [self.weights[0].shape[0], *(w.shape[1] for w in self.weights)]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def num_classes(self) -> int:
        return self.weights[-1].shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mlp) or self.layer_dims != other.layer_dims:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights)) and all(
            np.array_equal(a, b) for a, b in zip(self.biases, other.biases)
        )

    __hash__ = None  # type: ignore[assignment]


def init_mlp(layer_dims: Sequence[int], seed: int) -> Mlp:
    """参数在 [−1/√fan_in, +1/√fan_in] 上均匀初始化。"""

    dims = [int(d) for d in layer_dims]
    if len(dims) < 2:
        raise ModelShapeError(f"layer_dims 至少包含输入与输出两维: {dims}")
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return Mlp(tuple(weights), tuple(biases))


@dataclass(frozen=True)
class ForwardCache:
    inputs: tuple[Tensor, ...]
    preacts: tuple[Tensor, ...]
    logits: Logits


def _as_batch(model: Mlp, x: npt.ArrayLike) -> Tensor:
    batch = np.asarray(x, dtype=np.float64)
    if batch.ndim == 1:
        batch = batch.reshape(1, -1)
    if batch.ndim != 2 or batch.shape[1] != model.input_dim:
        raise ModelShapeError(f"输入形状 {batch.shape} 与模型输入维度 {model.input_dim} 不一致")
    if not np.all(np.isfinite(batch)):
        raise ValueError("输入含有非有限值")
    return batch


def forward_cache(model: Mlp, x: npt.ArrayLike) -> ForwardCache:
    hidden = _as_batch(model, x)
    inputs = []
    preacts = []
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        inputs.append(hidden)
        z = affine_forward(hidden, w, b)
        preacts.append(z)
        hidden = z if i == last else relu_forward(z)
    return ForwardCache(tuple(inputs), tuple(preacts), hidden)


def forward_logits(model: Mlp, x: npt.ArrayLike) -> Logits:
    """批量 logits；一维输入返回一维 logits。"""

    logits = forward_cache(model, x).logits
    return logits[0] if np.ndim(x) == 1 else logits


def predict_proba(model: Mlp, x: npt.ArrayLike) -> Tensor:
    return softmax(forward_logits(model, x))


@dataclass(frozen=True)
class Gradients:
    inputs: Tensor
    weights: tuple[Tensor, ...] = ()
    biases: tuple[Tensor, ...] = ()


def backward(
    model: Mlp, cache: ForwardCache, d_logits: Tensor, *, with_params: bool = False
) -> Gradients:
    """从 dL/dS 反向传播到输入（可选同时求参数梯度）。"""

    upstream = d_logits
    d_weights: list[Tensor] = []
    d_biases: list[Tensor] = []
    for i in range(len(model.weights) - 1, -1, -1):
        if i != len(model.weights) - 1:
            upstream = relu_input_grad(cache.preacts[i], upstream)
        if with_params:
            d_weights.append(freeze(cache.inputs[i].T @ upstream))
            d_biases.append(freeze(np.sum(upstream, axis=0)))
        upstream = affine_input_grad(model.weights[i], upstream)
    return Gradients(
        inputs=upstream,
        weights=tuple(reversed(d_weights)),
        biases=tuple(reversed(d_biases)),
    )


@dataclass(frozen=True)
class LossEvaluation:
    """一次前向 + 反向的结果（损失为逐行值，梯度为 Σ 行损失对输入的梯度）。"""

    logits: Logits
    probs: Tensor
    values: Tensor
    input_grad: Tensor
    plan: LossPlan


def evaluate_loss(model: Mlp, x: npt.ArrayLike, y: npt.ArrayLike, loss: LossSpec) -> LossEvaluation:
    cache = forward_cache(model, x)
    y_idx = label_indices(y, model.num_classes)
    if y_idx.shape[0] != cache.logits.shape[0]:
        raise ModelShapeError(f"标签数 {y_idx.shape[0]} 与批大小 {cache.logits.shape[0]} 不一致")
    plan = loss.plan(cache.logits, y_idx)
    grads = backward(model, cache, plan.logit_grad(cache.logits))
    return LossEvaluation(
        logits=cache.logits,
        probs=softmax(cache.logits),
        values=plan.values(cache.logits),
        input_grad=grads.inputs,
        plan=plan,
    )


def loss_input_gradient(model: Mlp, x: npt.ArrayLike, y: npt.ArrayLike, loss: LossSpec) -> Tensor:
    """∇_x L(θ, x, y)；DPDR 的 δ 与符号项视为常数。"""

    return evaluate_loss(model, x, y, loss).input_grad


def frozen_objective(model: Mlp, plan: LossPlan):
    """返回 x ↦ Σ 行损失（沿用冻结计划），用于差分校验。"""

    def objective(x: Tensor) -> float:
        return float(np.sum(plan.values(forward_cache(model, x).logits)))

    return objective
