"""方向概率差比（DPDR）损失及其 δ / ζ / 符号项。

L = (P_τ − P_y) / (δ − sign(P_τ − P_y)·(P_τ − ̀P_n − δ) + ζ)

δ、符号项以及 τ、第 n 大概率所在标签在每一步按当前值求出，
求梯度时视为常数。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import numpy.typing as npt

from sdmlab.losses.objectives import (
    LabelArray,
    LossConfigError,
    descending_order,
    label_indices,
    runner_up_indices,
)
from sdmlab.tensor.ops import ProbVector, Tensor, freeze

DEFAULT_ZETA = 1e-10
DEFAULT_DELTA_FLOOR = 1e-6

DeltaKind = Literal["batch_max", "per_example", "fixed"]


class DpdrDenominatorError(RuntimeError):
    """DPDR 分母非正（内部不变量被破坏）。"""


@dataclass(frozen=True)
class DeltaPolicy:
    """δ 的取值策略。

    - ``batch_max``: δ = max(floor, 0.5·max_batch(P_τ − ̀P_n))，整批共享
    - ``per_example``: 每行 δ = max(floor, 0.5·(P_τ − ̀P_n))
    - ``fixed``: δ = value
    """

    kind: DeltaKind = "batch_max"
    value: float | None = None
    floor: float = DEFAULT_DELTA_FLOOR

    def __post_init__(self) -> None:
        if self.kind not in ("batch_max", "per_example", "fixed"):
            raise LossConfigError(f"未知 δ 策略: {self.kind}")
        if self.kind == "fixed" and (self.value is None or not self.value > 0):
            raise LossConfigError("fixed δ 策略需要正的 value")
        if not self.floor > 0:
            raise LossConfigError(f"δ 下限必须为正: {self.floor}")

    @classmethod
    def fixed(cls, value: float) -> DeltaPolicy:
        return cls(kind="fixed", value=value)

    def resolve(self, gaps: Tensor) -> Tensor:
        """由每行的 P_τ − ̀P_n 求出每行的 δ。"""

        if self.kind == "fixed":
            return np.full(gaps.shape, float(self.value))
        if self.kind == "per_example":
            return np.maximum(self.floor, 0.5 * gaps)
        return np.full(gaps.shape, max(self.floor, 0.5 * float(np.max(gaps))))


@dataclass(frozen=True)
class DpdrTerms:
    """一步内冻结的 DPDR 量（批量，0 起始下标）。"""

    n: int
    y_idx: LabelArray
    tau: LabelArray
    rank: LabelArray
    delta: Tensor
    sign: Tensor
    zeta: float

    def denominators(self, probs: ProbVector) -> Tensor:
        rows = np.arange(probs.shape[0])
        p_tau = probs[rows, self.tau]
        p_rank = probs[rows, self.rank]
        den = self.delta - self.sign * (p_tau - p_rank - self.delta) + self.zeta
        if not np.all(den > 0):
            bad = int(np.argmin(den))
            raise DpdrDenominatorError(
                f"DPDR 分母非正: row={bad} den={den[bad]!r} n={self.n} δ={self.delta[bad]!r}"
            )
        return den

    def values(self, probs: ProbVector) -> Tensor:
        rows = np.arange(probs.shape[0])
        numerators = probs[rows, self.tau] - probs[rows, self.y_idx]
        return freeze(numerators / self.denominators(probs))

    def prob_grad(self, probs: ProbVector) -> Tensor:
        """dL/dP（δ、符号与下标冻结）。"""

        batch = probs.shape[0]
        rows = np.arange(batch)
        numerators = probs[rows, self.tau] - probs[rows, self.y_idx]
        den = self.denominators(probs)

        d_num = np.zeros_like(probs)
        np.add.at(d_num, (rows, self.tau), 1.0)
        np.add.at(d_num, (rows, self.y_idx), -1.0)
        d_den = np.zeros_like(probs)
        np.add.at(d_den, (rows, self.tau), -self.sign)
        np.add.at(d_den, (rows, self.rank), self.sign)

        grad = d_num / den[:, None] - (numerators / den**2)[:, None] * d_den
        return freeze(grad)


def dpdr_terms(
    probs: ProbVector,
    y_idx: LabelArray,
    n: int,
    policy: DeltaPolicy | None = None,
    zeta: float = DEFAULT_ZETA,
) -> DpdrTerms:
    """计算一步的 τ、第 n 大标签、δ 与符号项。"""

    batch, num_classes = probs.shape
    if batch < 1:
        raise LossConfigError("DPDR 需要非空批次")
    if not 2 <= n <= num_classes:
        raise LossConfigError(f"DPDR 阶数 n={n} 超出范围 2..{num_classes}")
    policy = policy or DeltaPolicy()
    rows = np.arange(batch)
    tau = runner_up_indices(probs, y_idx)
    rank = descending_order(probs)[:, n - 1]
    p_tau = probs[rows, tau]
    gaps = p_tau - probs[rows, rank]
    return DpdrTerms(
        n=n,
        y_idx=np.asarray(y_idx, dtype=np.int64),
        tau=tau,
        rank=rank,
        delta=freeze(policy.resolve(gaps)),
        sign=freeze(np.sign(p_tau - probs[rows, y_idx])),
        zeta=zeta,
    )


@dataclass(frozen=True)
class DpdrContext:
    """单个样本在某一步的 DPDR 量（标签 1 起始）。"""

    probs: ProbVector
    y: int
    tau: int
    n: int
    sorted_probs: Tensor
    rank_label: int
    delta: float
    zeta: float = DEFAULT_ZETA
    sign: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "sign", float(np.sign(self.probs[self.tau - 1] - self.probs[self.y - 1]))
        )

    @property
    def p_tau(self) -> float:
        return float(self.probs[self.tau - 1])

    @property
    def p_true(self) -> float:
        return float(self.probs[self.y - 1])

    @property
    def p_rank(self) -> float:
        return float(self.sorted_probs[self.n - 1])

    def denominator(self) -> float:
        return self.delta - self.sign * (self.p_tau - self.p_rank - self.delta) + self.zeta


def build_dpdr_context(
    probs: ProbVector,
    labels: npt.ArrayLike,
    n: int,
    policy: DeltaPolicy | None = None,
    zeta: float = DEFAULT_ZETA,
) -> list[DpdrContext]:
    """为批内每一行构建 DpdrContext；δ 按策略在整批上求出。"""

    probs = np.atleast_2d(probs)
    y_idx = label_indices(labels, probs.shape[1])
    terms = dpdr_terms(probs, y_idx, n, policy, zeta)
    contexts = []
    for row in range(probs.shape[0]):
        contexts.append(
            DpdrContext(
                probs=freeze(probs[row].copy()),
                y=int(y_idx[row]) + 1,
                tau=int(terms.tau[row]) + 1,
                n=n,
                sorted_probs=freeze(np.sort(probs[row])[::-1].copy()),
                rank_label=int(terms.rank[row]) + 1,
                delta=float(terms.delta[row]),
                zeta=zeta,
            )
        )
    return contexts


def dpdr_loss(ctx: DpdrContext) -> float:
    denominator = ctx.denominator()
    if not denominator > 0:
        raise DpdrDenominatorError(f"DPDR 分母非正: {denominator!r} (n={ctx.n}, δ={ctx.delta!r})")
    return (ctx.p_tau - ctx.p_true) / denominator
