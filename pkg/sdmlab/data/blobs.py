"""合成高斯团数据（桌面规模的替身数据集）。"""

from __future__ import annotations

import numpy as np

from sdmlab.data.base import Dataset

CENTER_LOW = 0.2
CENTER_HIGH = 0.8
MIN_CENTER_DISTANCE = 0.3
_CENTER_TRIES = 1000


def _class_centers(rng: np.random.Generator, num_classes: int, dim: int) -> np.ndarray:
    """拒绝采样类别中心，使两两距离不小于 MIN_CENTER_DISTANCE（尽力而为）。"""

    centers: list[np.ndarray] = []
    for _ in range(num_classes):
        best = None
        best_gap = -1.0
        for _ in range(_CENTER_TRIES):
            candidate = rng.uniform(CENTER_LOW, CENTER_HIGH, size=dim)
            gap = min((float(np.linalg.norm(candidate - c)) for c in centers), default=np.inf)
            if gap > best_gap:
                best, best_gap = candidate, gap
            if gap >= MIN_CENTER_DISTANCE:
                break
        centers.append(best)
    return np.stack(centers)


def make_synthetic_blobs(
    num_classes: int,
    dim: int,
    per_class: int,
    spread: float,
    seed: int,
    *,
    label_count: int | None = None,
) -> Dataset:
    """各类别为以随机中心为均值、标准差 spread 的高斯团，截断到 [0, 1]^d。

    ``label_count`` 大于 ``num_classes`` 时，数据只使用前 num_classes 个标签，
    但数据集声明 label_count 个类别。
    """

    if num_classes < 2 or (label_count or num_classes) < 3:
        raise ValueError(f"类别数必须 ≥ 3: K={label_count or num_classes}")
    if dim < 2:
        raise ValueError(f"输入维度必须 ≥ 2: d={dim}")
    if per_class < 1 or spread < 0:
        raise ValueError(f"非法参数: per_class={per_class}, spread={spread}")
    rng = np.random.default_rng(seed)
    centers = _class_centers(rng, num_classes, dim)
    noise = rng.standard_normal((num_classes, per_class, dim))
    inputs = np.clip(centers[:, None, :] + spread * noise, 0.0, 1.0).reshape(-1, dim)
    labels = np.repeat(np.arange(1, num_classes + 1), per_class)
    name = f"blobs-k{num_classes}-d{dim}-s{seed}"
    return Dataset(name, label_count or num_classes, inputs, labels)
