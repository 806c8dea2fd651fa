"""损失规格与单步冻结计划。

``LossSpec.plan`` 在当前 logits 上冻结 τ、δ、符号等分段量，得到 ``LossPlan``；
``LossPlan`` 给出逐行损失值与 dL/dS，供网络反向传播到输入。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from sdmlab.losses.dpdr import DEFAULT_ZETA, DeltaPolicy, DpdrTerms, dpdr_terms
from sdmlab.losses.objectives import LabelArray, LossConfigError, runner_up_indices
from sdmlab.tensor.ops import Logits, Tensor, freeze, softmax, softmax_input_grad


class LossKind(str, Enum):
    CE = "ce"
    NEG_TRUE_PROB = "neg_true_prob"
    PROB_DIFF = "prob_diff"
    DPDR = "dpdr"


@dataclass(frozen=True)
class LossSpec:
    kind: LossKind
    n: int | None = None
    delta: DeltaPolicy = field(default_factory=DeltaPolicy)
    zeta: float = DEFAULT_ZETA

    def __post_init__(self) -> None:
        if self.kind is LossKind.DPDR and (self.n is None or self.n < 2):
            raise LossConfigError(f"DPDR 需要阶数 n ≥ 2，实际 {self.n}")
        if not self.zeta > 0:
            raise LossConfigError(f"ζ 必须为正: {self.zeta}")

    @classmethod
    def ce(cls) -> LossSpec:
        return cls(LossKind.CE)

    @classmethod
    def neg_true_prob(cls) -> LossSpec:
        return cls(LossKind.NEG_TRUE_PROB)

    @classmethod
    def prob_diff(cls) -> LossSpec:
        return cls(LossKind.PROB_DIFF)

    @classmethod
    def dpdr(cls, n: int, delta: DeltaPolicy | None = None, zeta: float = DEFAULT_ZETA) -> LossSpec:
        return cls(LossKind.DPDR, n=n, delta=delta or DeltaPolicy(), zeta=zeta)

    @property
    def label(self) -> str:
        return f"dpdr{self.n}" if self.kind is LossKind.DPDR else self.kind.value

    def plan(self, logits: Logits, y_idx: LabelArray) -> LossPlan:
        """在当前 logits 上冻结分段量。"""

        logits = np.atleast_2d(logits)
        num_classes = logits.shape[1]
        if self.kind is not LossKind.CE and num_classes < 3:
            raise LossConfigError(f"{self.kind.value} 要求 K ≥ 3，实际 K={num_classes}")
        probs = softmax(logits)
        tau = runner_up_indices(probs, y_idx)
        terms = None
        if self.kind is LossKind.DPDR:
            assert self.n is not None
            if self.n > num_classes:
                raise LossConfigError(f"DPDR 阶数 n={self.n} 超过类别数 K={num_classes}")
            terms = dpdr_terms(probs, y_idx, self.n, self.delta, self.zeta)
        return LossPlan(spec=self, y_idx=np.asarray(y_idx, dtype=np.int64), tau=tau, dpdr=terms)


@dataclass(frozen=True)
class LossPlan:
    spec: LossSpec
    y_idx: LabelArray
    tau: LabelArray
    dpdr: DpdrTerms | None = None

    def values(self, logits: Logits) -> Tensor:
        """逐行损失值。"""

        logits = np.atleast_2d(logits)
        rows = np.arange(logits.shape[0])
        kind = self.spec.kind
        if kind is LossKind.CE:
            top = np.max(logits, axis=1)
            lse = top + np.log(np.sum(np.exp(logits - top[:, None]), axis=1))
            return freeze(lse - logits[rows, self.y_idx])
        probs = softmax(logits)
        if kind is LossKind.NEG_TRUE_PROB:
            return freeze(-probs[rows, self.y_idx])
        if kind is LossKind.PROB_DIFF:
            return freeze(probs[rows, self.tau] - probs[rows, self.y_idx])
        assert self.dpdr is not None
        return self.dpdr.values(probs)

    def logit_grad(self, logits: Logits) -> Tensor:
        """Σ_rows L 对 logits 的梯度。"""

        logits = np.atleast_2d(logits)
        rows = np.arange(logits.shape[0])
        probs = softmax(logits)
        kind = self.spec.kind
        if kind is LossKind.CE:
            grad = np.array(probs, copy=True)
            grad[rows, self.y_idx] -= 1.0
            return freeze(grad)
        d_probs = np.zeros_like(probs)
        if kind is LossKind.NEG_TRUE_PROB:
            d_probs[rows, self.y_idx] = -1.0
        elif kind is LossKind.PROB_DIFF:
            d_probs[rows, self.tau] += 1.0
            d_probs[rows, self.y_idx] -= 1.0
        else:
            assert self.dpdr is not None
            d_probs = self.dpdr.prob_grad(probs)
        return softmax_input_grad(probs, d_probs)
