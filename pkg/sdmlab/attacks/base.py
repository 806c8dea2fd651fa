"""攻击配置、逐步记录与攻击结果。"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

from sdmlab.attacks.schedule import schedule_lookup
from sdmlab.losses.dpdr import DEFAULT_ZETA, DeltaPolicy
from sdmlab.tensor.ops import Tensor

LINF_EPSILON = 8 / 255
LINF_ALPHA = 2 / 255
L2_EPSILON = 1.0
L2_ALPHA = 0.2


class Norm(str, Enum):
    LINF = "linf"
    L2 = "l2"


class AttackConfigError(ValueError):
    """攻击配置非法。"""


class AttackError(RuntimeError):
    """攻击迭代中出现非有限损失或梯度。"""

    def __init__(self, message: str, *, cycle: int, stage: int, step: int) -> None:
        super().__init__(f"{message} (cycle={cycle}, stage={stage}, step={step})")
        self.cycle = cycle
        self.stage = stage
        self.step = step


class BudgetViolationError(RuntimeError):
    """对抗样本超出扰动预算或单位盒。"""


@dataclass(frozen=True)
class AttackConfig:
    """范数、预算 ε、步长 α 以及 cycle / stage / step 数 (C, N, T)。"""

    norm: Norm = Norm.LINF
    epsilon: float = LINF_EPSILON
    alpha: float = LINF_ALPHA
    cycles: int = 2
    stages: int = 5
    steps: int = 10
    seed: int = 0
    clip_unit_box: bool = True
    track_best: bool = True
    record_trace: bool = False
    random_start: bool = False
    delta: DeltaPolicy = field(default_factory=DeltaPolicy)
    zeta: float = DEFAULT_ZETA

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "norm", Norm(self.norm))
        except ValueError as exc:
            raise AttackConfigError(f"未知范数: {self.norm!r}（支持 linf, l2）") from exc
        if not self.epsilon >= 0:
            raise AttackConfigError(f"预算 ε 不能为负: {self.epsilon}")
        if not self.alpha > 0:
            raise AttackConfigError(f"步长 α 必须为正: {self.alpha}")
        if self.cycles < 1 or self.steps < 1:
            raise AttackConfigError(f"cycles 与 steps 必须 ≥ 1: C={self.cycles}, T={self.steps}")
        if self.stages < 2:
            raise AttackConfigError(f"stages 必须 ≥ 2（第 2 阶段起使用 DPDR）: N={self.stages}")
        if not self.zeta > 0:
            raise AttackConfigError(f"ζ 必须为正: {self.zeta}")

    @property
    def total_steps(self) -> int:
        return self.cycles * self.stages * self.steps

    def with_total_steps(self, total: int) -> AttackConfig:
        """按预设总步数替换 (C, N, T)。"""

        schedule = schedule_lookup(total)
        return replace(self, cycles=schedule.cycles, stages=schedule.stages, steps=schedule.steps)

    @classmethod
    def default_for(cls, norm: Norm | str, **overrides: Any) -> AttackConfig:
        """ℓ∞: ε=8/255, α=2/255；ℓ2: ε=1.0, α=0.2。"""

        norm = Norm(norm)
        if norm is Norm.LINF:
            base: dict[str, Any] = {"epsilon": LINF_EPSILON, "alpha": LINF_ALPHA}
        else:
            base = {"epsilon": L2_EPSILON, "alpha": L2_ALPHA}
        return cls(norm=norm, **{**base, **overrides})


@dataclass(frozen=True)
class StepRecord:
    cycle: int
    stage: int
    step: int
    loss: float
    p_true: float
    p_tau: float
    predicted: int
    x: Tensor | None = None

    @property
    def margin(self) -> float:
        return self.p_tau - self.p_true


@dataclass
class AttackOutcome:
    x: Tensor
    y: int
    x_adv: Tensor
    predicted: int
    success: bool
    steps_used: int
    best_x: Tensor
    best_margin: float
    best_predicted: int
    trace: list[StepRecord] = field(default_factory=list)

    @property
    def best_success(self) -> bool:
        return self.best_predicted != self.y

    def final(self, use_best: bool = False) -> Tensor:
        return self.best_x if use_best else self.x_adv

    def fooled(self, use_best: bool = False) -> bool:
        return self.best_success if use_best else self.success
