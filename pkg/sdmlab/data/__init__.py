"""数据集读取与合成。"""

from __future__ import annotations

from pathlib import Path

from sdmlab.data.base import (
    Dataset,
    DatasetFormatError,
    EmptyDatasetError,
    LabeledExample,
    stack_examples,
)
from sdmlab.data.blobs import make_synthetic_blobs
from sdmlab.data.idx import load_idx, write_idx
from sdmlab.data.tabular import load_csv

_BLOB_KEYS = {"k": int, "d": int, "per_class": int, "spread": float, "seed": int, "labels": int}
_BLOB_DEFAULTS = {"k": 6, "d": 8, "per_class": 200, "spread": 0.12, "seed": 0}


def parse_blob_spec(spec: str) -> dict[str, int | float]:
    """解析 ``k=6,d=8,per_class=200,spread=0.12,seed=0``。"""

    params: dict[str, int | float] = dict(_BLOB_DEFAULTS)
    for item in filter(None, (part.strip() for part in spec.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip().lower()
        if not sep or key not in _BLOB_KEYS:
            raise DatasetFormatError(f"无法识别的 blobs 参数: {item!r}（支持 {sorted(_BLOB_KEYS)}）")
        try:
            params[key] = _BLOB_KEYS[key](value.strip())
        except ValueError as exc:
            raise DatasetFormatError(f"blobs 参数 {key} 取值非法: {value!r}") from exc
    return params


def resolve_dataset(source: str) -> Dataset:
    """``blobs:<k=v,...>`` | ``idx:<images>,<labels>`` | ``[csv:]<path.csv>``。"""

    kind, sep, rest = source.partition(":")
    if sep and kind == "blobs":
        params = parse_blob_spec(rest)
        return make_synthetic_blobs(
            int(params["k"]),
            int(params["d"]),
            int(params["per_class"]),
            float(params["spread"]),
            int(params["seed"]),
            label_count=int(params["labels"]) if "labels" in params else None,
        )
    if sep and kind == "idx":
        images, comma, labels = rest.partition(",")
        if not comma:
            raise DatasetFormatError("idx 数据需要写作 idx:<images>,<labels>")
        return load_idx(images.strip(), labels.strip())
    if sep and kind == "csv":
        return load_csv(rest)
    path = Path(source)
    if path.suffix.lower() == ".csv":
        return load_csv(path)
    raise DatasetFormatError(f"无法识别的数据源: {source!r}")


__all__ = [
    "Dataset",
    "DatasetFormatError",
    "EmptyDatasetError",
    "LabeledExample",
    "load_csv",
    "load_idx",
    "make_synthetic_blobs",
    "parse_blob_spec",
    "resolve_dataset",
    "stack_examples",
    "write_idx",
]
