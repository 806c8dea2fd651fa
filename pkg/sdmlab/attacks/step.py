"""单步更新与投影规则。

ℓ∞: x'_t = x + clamp(x'_{t−1} − x + α·sgn(g), −ε, ε)
ℓ2: x'_t = x + Π_ε(x'_{t−1} − x + α·g / max(‖g‖₂, 1e-12))

两者之后（默认）再截断到单位盒 [0, 1]^d。一维输入视为单个样本，二维输入按行处理。
"""

from __future__ import annotations

import numpy as np

from sdmlab.attacks.base import AttackConfig, BudgetViolationError, Norm
from sdmlab.tensor.ops import Tensor, TensorShapeError, freeze

GRAD_NORM_FLOOR = 1e-12
BUDGET_TOLERANCE = 1e-9


def _row_norms(values: np.ndarray) -> np.ndarray:
    """每个样本的 ℓ2 范数（保持可广播的形状）。"""

    if values.ndim == 1:
        return np.array(np.linalg.norm(values))
    return np.linalg.norm(values.reshape(values.shape[0], -1), axis=1).reshape(
        (-1,) + (1,) * (values.ndim - 1)
    )


def project_perturbation(delta: np.ndarray, cfg: AttackConfig) -> np.ndarray:
    if cfg.norm is Norm.LINF:
        return np.clip(delta, -cfg.epsilon, cfg.epsilon)
    norms = _row_norms(delta)
    scale = np.where(norms > cfg.epsilon, cfg.epsilon / np.maximum(norms, GRAD_NORM_FLOOR), 1.0)
    return delta * scale


def step_update(x: Tensor, x_cur: Tensor, grad: Tensor, cfg: AttackConfig) -> Tensor:
    if not (x.shape == x_cur.shape == grad.shape):
        raise TensorShapeError(f"step_update 形状不一致: {x.shape}, {x_cur.shape}, {grad.shape}")
    if cfg.norm is Norm.LINF:
        direction = np.sign(grad)
    else:
        direction = grad / np.maximum(_row_norms(grad), GRAD_NORM_FLOOR)
    updated = x + project_perturbation(x_cur - x + cfg.alpha * direction, cfg)
    if cfg.clip_unit_box:
        updated = np.clip(updated, 0.0, 1.0)
    return freeze(updated)


def random_start(x: Tensor, cfg: AttackConfig, rng: np.random.Generator) -> Tensor:
    """ℓ∞ 盒内或 ℓ2 球内均匀采样的初始点。"""

    if cfg.norm is Norm.LINF:
        noise = rng.uniform(-cfg.epsilon, cfg.epsilon, size=x.shape)
    else:
        batch = np.atleast_2d(x)
        direction = rng.standard_normal(batch.shape)
        direction /= np.maximum(_row_norms(direction), GRAD_NORM_FLOOR)
        radius = cfg.epsilon * rng.uniform(size=(batch.shape[0], 1)) ** (1.0 / batch.shape[1])
        noise = (direction * radius).reshape(x.shape)
    start = x + project_perturbation(noise, cfg)
    if cfg.clip_unit_box:
        start = np.clip(start, 0.0, 1.0)
    return freeze(start)


def perturbation_norms(x: Tensor, x_adv: Tensor, norm: Norm) -> np.ndarray:
    delta = np.atleast_2d(x_adv - x)
    if norm is Norm.LINF:
        return np.max(np.abs(delta), axis=1)
    return np.linalg.norm(delta, axis=1)


def check_budget(x: Tensor, x_adv: Tensor, cfg: AttackConfig, tol: float = BUDGET_TOLERANCE) -> None:
    """断言 ‖x_adv − x‖ ≤ ε + tol，且（启用截断时）位于单位盒内。"""

    norms = perturbation_norms(x, x_adv, cfg.norm)
    if np.any(norms > cfg.epsilon + tol):
        worst = int(np.argmax(norms))
        raise BudgetViolationError(
            f"样本 {worst} 扰动 {norms[worst]!r} 超出 {cfg.norm.value} 预算 ε={cfg.epsilon!r}"
        )
    if cfg.clip_unit_box and (np.any(x_adv < -tol) or np.any(x_adv > 1.0 + tol)):
        raise BudgetViolationError("对抗样本超出单位盒 [0, 1]^d")
