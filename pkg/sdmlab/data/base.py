"""带标签样本与数据集。

输入位于单位盒 [0, 1]^d 内，标签为 1 起始（1..K）。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt

from sdmlab.tensor.ops import Tensor, as_tensor, freeze


class DatasetFormatError(ValueError):
    """数据文件格式或取值错误。"""


class EmptyDatasetError(DatasetFormatError):
    """数据集为空。"""


@dataclass(frozen=True)
class LabeledExample:
    x: Tensor
    y: int

    def __post_init__(self) -> None:
        x = as_tensor(self.x, ndim=1, name="x")
        if x.size < 1 or np.any(x < 0.0) or np.any(x > 1.0):
            raise DatasetFormatError("样本输入必须位于 [0, 1]^d 内")
        if int(self.y) < 1:
            raise DatasetFormatError(f"标签必须 ≥ 1: {self.y}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", int(self.y))


def stack_examples(examples: Sequence[LabeledExample]) -> tuple[Tensor, npt.NDArray[np.int64]]:
    if not examples:
        raise EmptyDatasetError("样本列表为空")
    dims = {ex.x.shape[0] for ex in examples}
    if len(dims) != 1:
        raise DatasetFormatError(f"样本维度不一致: {sorted(dims)}")
    inputs = freeze(np.stack([ex.x for ex in examples]))
    labels = np.array([ex.y for ex in examples], dtype=np.int64)
    labels.setflags(write=False)
    return inputs, labels


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    num_classes: int
    inputs: Tensor
    labels: npt.NDArray[np.int64]

    def __post_init__(self) -> None:
        inputs = as_tensor(self.inputs, ndim=2, name="inputs")
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if inputs.shape[0] == 0:
            raise EmptyDatasetError(f"数据集 {self.name} 为空")
        if labels.shape[0] != inputs.shape[0]:
            raise DatasetFormatError(f"样本数 {inputs.shape[0]} 与标签数 {labels.shape[0]} 不一致")
        if np.any(inputs < 0.0) or np.any(inputs > 1.0):
            row = int(np.argmax(np.any((inputs < 0.0) | (inputs > 1.0), axis=1)))
            raise DatasetFormatError(f"数据集 {self.name} 第 {row} 行超出 [0, 1]")
        if labels.min() < 1 or labels.max() > self.num_classes:
            raise DatasetFormatError(f"标签超出范围 1..{self.num_classes}")
        labels.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    def example(self, index: int) -> LabeledExample:
        return LabeledExample(self.inputs[index], int(self.labels[index]))

    def subset(self, indices: npt.ArrayLike, name: str | None = None) -> Dataset:
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(name or self.name, self.num_classes, self.inputs[idx], self.labels[idx])

    def head(self, count: int) -> Dataset:
        return self.subset(np.arange(min(count, len(self))))

    def split(self, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
        """按种子打乱后切分为 (train, test)。"""

        if not 0.0 < test_fraction < 1.0:
            raise ValueError(f"test_fraction 必须位于 (0, 1): {test_fraction}")
        order = np.random.default_rng(seed).permutation(len(self))
        n_test = max(1, int(round(len(self) * test_fraction)))
        if n_test >= len(self):
            raise ValueError("切分后训练集为空")
        test_idx = np.sort(order[:n_test])
        train_idx = np.sort(order[n_test:])
        return (
            self.subset(train_idx, f"{self.name}/train"),
            self.subset(test_idx, f"{self.name}/test"),
        )
