"""模型文件格式（逐位精确）。

    "SDMM" | u32 version=1 | u32 层数 L | L × (u32 in, u32 out)
    | 每层: in·out 个 f64 权重（行优先） + out 个 f64 偏置

所有整数与浮点数均为小端序。
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from sdmlab.net.mlp import Mlp

MAGIC = b"SDMM"
VERSION = 1
MAX_DIM = 1 << 24
_F64 = np.dtype("<f8")


class ModelFormatError(ValueError):
    """模型文件格式错误。"""


class ModelTruncatedError(ModelFormatError):
    """模型文件内容少于声明的长度。"""


def dumps_model(model: Mlp) -> bytes:
    dims = [(w.shape[0], w.shape[1]) for w in model.weights]
    parts = [MAGIC, struct.pack("<II", VERSION, len(dims))]
    parts.extend(struct.pack("<II", fan_in, fan_out) for fan_in, fan_out in dims)
    for w, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(w, dtype=_F64).tobytes(order="C"))
        parts.append(np.ascontiguousarray(b, dtype=_F64).tobytes(order="C"))
    return b"".join(parts)


def loads_model(payload: bytes) -> Mlp:
    if len(payload) < 12:
        raise ModelTruncatedError(f"文件头不完整: {len(payload)} 字节")
    if payload[:4] != MAGIC:
        raise ModelFormatError(f"魔数错误: {payload[:4]!r}")
    version, layer_count = struct.unpack_from("<II", payload, 4)
    if version != VERSION:
        raise ModelFormatError(f"不支持的版本: {version}")
    if layer_count < 1 or layer_count > 1024:
        raise ModelFormatError(f"层数非法: {layer_count}")
    offset = 12
    header_end = offset + 8 * layer_count
    if len(payload) < header_end:
        raise ModelTruncatedError(f"层维度记录不完整: 需要 {header_end} 字节，实际 {len(payload)}")
    dims = []
    for _ in range(layer_count):
        fan_in, fan_out = struct.unpack_from("<II", payload, offset)
        offset += 8
        if not (1 <= fan_in <= MAX_DIM and 1 <= fan_out <= MAX_DIM):
            raise ModelFormatError(f"层维度溢出: ({fan_in}, {fan_out})")
        dims.append((fan_in, fan_out))

    expected = header_end + sum((i * o + o) * _F64.itemsize for i, o in dims)
    if len(payload) < expected:
        raise ModelTruncatedError(f"参数数据不完整: 需要 {expected} 字节，实际 {len(payload)}")
    if len(payload) > expected:
        raise ModelFormatError(f"文件末尾存在 {len(payload) - expected} 字节多余数据")

    weights = []
    biases = []
    for fan_in, fan_out in dims:
        w = np.frombuffer(payload, dtype=_F64, count=fan_in * fan_out, offset=offset)
        offset += w.nbytes
        b = np.frombuffer(payload, dtype=_F64, count=fan_out, offset=offset)
        offset += b.nbytes
        weights.append(w.reshape(fan_in, fan_out).astype(np.float64))
        biases.append(b.astype(np.float64))
    try:
        return Mlp(tuple(weights), tuple(biases))
    except ValueError as exc:
        raise ModelFormatError(f"模型参数非法: {exc}") from exc


def save_model(model: Mlp, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(dumps_model(model))
    return target


def load_model(path: str | Path) -> Mlp:
    return loads_model(Path(path).read_bytes())


def model_digest(model: Mlp) -> str:
    """序列化字节的 sha256，用于报告中标识受害模型。"""

    return hashlib.sha256(dumps_model(model)).hexdigest()
