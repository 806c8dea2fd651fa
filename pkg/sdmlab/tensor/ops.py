"""稠密张量运算与前馈分类器所需的可微层原语。

张量统一使用 float64 的 ``numpy.ndarray``（行优先，批维度在前）。
对外发布的张量均为只读数组，构造后不可变，可在线程间安全共享读取。
"""

from __future__ import annotations

from typing import Any

import numpy as np
import numpy.typing as npt

Tensor = npt.NDArray[np.float64]
Logits = Tensor
ProbVector = Tensor


class TensorShapeError(ValueError):
    """张量形状不匹配。"""


def as_tensor(data: Any, *, ndim: int | None = None, name: str = "tensor") -> Tensor:
    """转换为只读 float64 张量，并检查维度与有限性。"""

    array = np.array(data, dtype=np.float64, copy=True)
    if ndim is not None and array.ndim != ndim:
        raise TensorShapeError(f"{name} 需要 {ndim} 维，实际形状 {array.shape}")
    if array.size and not np.all(np.isfinite(array)):
        raise ValueError(f"{name} 含有非有限值")
    array.setflags(write=False)
    return array


def freeze(array: np.ndarray) -> Tensor:
    """将运算结果标记为只读并返回。"""

    array.setflags(write=False)
    return array


def affine_forward(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """out[i, j] = Σ_k x[i, k]·W[k, j] + b[j]。"""

    if x.ndim != 2 or weight.ndim != 2 or bias.ndim != 1:
        raise TensorShapeError(
            f"affine_forward 需要 x[B,in]、W[in,out]、b[out]，实际 {x.shape}、{weight.shape}、{bias.shape}"
        )
    if x.shape[1] != weight.shape[0] or weight.shape[1] != bias.shape[0]:
        raise TensorShapeError(
            f"affine_forward 维度不一致: x{x.shape} · W{weight.shape} + b{bias.shape}"
        )
    return freeze(x @ weight + bias)


def affine_input_grad(weight: Tensor, upstream: Tensor) -> Tensor:
    if upstream.ndim != 2 or upstream.shape[1] != weight.shape[1]:
        raise TensorShapeError(f"上游梯度形状 {upstream.shape} 与 W{weight.shape} 不一致")
    return freeze(upstream @ weight.T)


def relu_forward(x: Tensor) -> Tensor:
    return freeze(np.maximum(x, 0.0))


def relu_input_grad(x: Tensor, upstream: Tensor) -> Tensor:
    """ReLU 的输入梯度；x == 0 处取次梯度 0。"""

    if x.shape != upstream.shape:
        raise TensorShapeError(f"relu_input_grad 形状不一致: {x.shape} vs {upstream.shape}")
    return freeze(np.where(x > 0.0, upstream, 0.0))


def softmax(logits: Logits) -> ProbVector:
    """按最后一维计算 softmax（先减去最大值）。"""

    if logits.shape[-1] < 2:
        raise TensorShapeError(f"softmax 至少需要 2 个类别，实际形状 {logits.shape}")
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return freeze(exps / np.sum(exps, axis=-1, keepdims=True))


def softmax_input_grad(probs: ProbVector, upstream: Tensor) -> Tensor:
    """给定 dL/dP，返回 dL/dS = P ⊙ (dL/dP − ⟨dL/dP, P⟩)。"""

    if probs.shape != upstream.shape:
        raise TensorShapeError(f"softmax_input_grad 形状不一致: {probs.shape} vs {upstream.shape}")
    inner = np.sum(upstream * probs, axis=-1, keepdims=True)
    return freeze(probs * (upstream - inner))
