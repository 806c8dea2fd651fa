"""中心差分梯度预言机，用于独立校验解析梯度。"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from sdmlab.tensor.ops import Tensor, freeze

ScalarFn = Callable[[Tensor], float]


class GradientOracleError(RuntimeError):
    """差分求值得到非有限值。"""


def finite_difference_input_grad(fn: ScalarFn, x: Tensor, h: float = 1e-5) -> Tensor:
    """逐坐标计算 (f(x + h·e_i) − f(x − h·e_i)) / (2h)。"""

    if not h > 0:
        raise ValueError(f"差分步长必须为正: {h}")
    base = np.array(x, dtype=np.float64, copy=True)
    flat = base.reshape(-1)
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        upper = float(fn(base))
        flat[i] = original - h
        lower = float(fn(base))
        flat[i] = original
        if not (math.isfinite(upper) and math.isfinite(lower)):
            raise GradientOracleError(f"坐标 {i} 处的函数值非有限: f(+h)={upper}, f(-h)={lower}")
        grad[i] = (upper - lower) / (2.0 * h)
    return freeze(grad.reshape(base.shape))


def relative_error(analytic: Tensor, numeric: Tensor, floor: float = 1e-12) -> float:
    """‖a − n‖₂ / max(‖a‖₂, ‖n‖₂, floor)。"""

    scale = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)), floor)
    return float(np.linalg.norm(np.asarray(analytic) - np.asarray(numeric))) / scale
