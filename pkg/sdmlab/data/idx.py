"""IDX（MNIST 风格）二进制格式读写。

    图像: u32 magic=0x00000803 | u32 count | u32 rows | u32 cols | u8[] 像素
    标签: u32 magic=0x00000801 | u32 count | u8[] 标签

头部为大端序。像素除以 255 缩放到 [0, 1]，标签平移为 1 起始。
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import numpy.typing as npt

from sdmlab.data.base import Dataset, DatasetFormatError, EmptyDatasetError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def _read_header(payload: bytes, magic: int, ndim: int, path: Path) -> tuple[list[int], int]:
    header_len = 4 * (1 + ndim)
    if len(payload) < 4:
        raise DatasetFormatError(f"{path}: 文件头不完整")
    found = struct.unpack_from(">I", payload, 0)[0]
    if found != magic:
        raise DatasetFormatError(f"{path}: 魔数不匹配 0x{found:08x}（期望 0x{magic:08x}）")
    if len(payload) < header_len:
        raise DatasetFormatError(f"{path}: 文件头不完整")
    dims = list(struct.unpack_from(f">{ndim}I", payload, 4))
    return dims, header_len


def _read_payload(payload: bytes, offset: int, count: int, path: Path) -> npt.NDArray[np.uint8]:
    available = len(payload) - offset
    if available < count:
        raise DatasetFormatError(f"{path}: 数据截断，声明 {count} 字节，实际 {available}")
    return np.frombuffer(payload, dtype=np.uint8, count=count, offset=offset)


def load_idx(
    images_path: str | Path,
    labels_path: str | Path,
    *,
    num_classes: int | None = None,
    name: str | None = None,
) -> Dataset:
    images_path = Path(images_path)
    labels_path = Path(labels_path)
    image_bytes = images_path.read_bytes()
    label_bytes = labels_path.read_bytes()

    (count, rows, cols), image_offset = _read_header(image_bytes, IMAGE_MAGIC, 3, images_path)
    (label_count,), label_offset = _read_header(label_bytes, LABEL_MAGIC, 1, labels_path)
    if count != label_count:
        raise DatasetFormatError(f"图像数 {count} 与标签数 {label_count} 不一致")
    if count == 0:
        raise EmptyDatasetError(f"{images_path}: 数据集为空")

    pixels = _read_payload(image_bytes, image_offset, count * rows * cols, images_path)
    raw_labels = _read_payload(label_bytes, label_offset, label_count, labels_path)

    inputs = pixels.reshape(count, rows * cols).astype(np.float64) / 255.0
    labels = raw_labels.astype(np.int64) + 1
    classes = num_classes or int(labels.max())
    return Dataset(name or images_path.stem, classes, inputs, labels)


def write_idx(
    images_path: str | Path,
    labels_path: str | Path,
    images: npt.ArrayLike,
    labels: npt.ArrayLike,
) -> None:
    """写出 IDX 文件对（images: [count, rows, cols] u8；labels: 0 起始 u8）。"""

    pixel_array = np.asarray(images, dtype=np.uint8)
    label_array = np.asarray(labels, dtype=np.uint8).reshape(-1)
    if pixel_array.ndim != 3:
        raise DatasetFormatError(f"图像数组需要 3 维，实际 {pixel_array.shape}")
    count, rows, cols = pixel_array.shape
    Path(images_path).write_bytes(
        struct.pack(">IIII", IMAGE_MAGIC, count, rows, cols) + pixel_array.tobytes(order="C")
    )
    Path(labels_path).write_bytes(
        struct.pack(">II", LABEL_MAGIC, label_array.shape[0]) + label_array.tobytes()
    )
