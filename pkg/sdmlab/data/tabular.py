"""CSV 数据：每行 ``label,v1,...,vd``，取值已在 [0, 1] 内，标签 1 起始。"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from sdmlab.data.base import Dataset, DatasetFormatError, EmptyDatasetError


def load_csv(path: str | Path, *, num_classes: int | None = None, name: str | None = None) -> Dataset:
    path = Path(path)
    inputs: list[list[float]] = []
    labels: list[int] = []
    width: int | None = None
    with path.open(newline="", encoding="utf-8") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise DatasetFormatError(f"{path}: 第 {row_no} 行缺少特征列")
            if width is None:
                width = len(row) - 1
            elif len(row) - 1 != width:
                raise DatasetFormatError(
                    f"{path}: 第 {row_no} 行有 {len(row) - 1} 个特征，期望 {width}"
                )
            try:
                label = int(row[0])
                values = [float(cell) for cell in row[1:]]
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: 第 {row_no} 行含非数值字段: {exc}") from exc
            if label < 1:
                raise DatasetFormatError(f"{path}: 第 {row_no} 行标签 {label} 必须 ≥ 1")
            if not all(math.isfinite(v) and 0.0 <= v <= 1.0 for v in values):
                raise DatasetFormatError(f"{path}: 第 {row_no} 行取值超出 [0, 1]")
            labels.append(label)
            inputs.append(values)

    if not inputs:
        raise EmptyDatasetError(f"{path}: 数据集为空")
    label_array = np.array(labels, dtype=np.int64)
    return Dataset(
        name or path.stem,
        num_classes or int(label_array.max()),
        np.array(inputs, dtype=np.float64),
        label_array,
    )
