from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import pytest

from sdmlab.data import (
    Dataset,
    DatasetFormatError,
    EmptyDatasetError,
    LabeledExample,
    load_csv,
    load_idx,
    make_synthetic_blobs,
    parse_blob_spec,
    resolve_dataset,
    write_idx,
)


def _write_pair(tmp_path: Path, images: np.ndarray, labels: np.ndarray) -> tuple[Path, Path]:
    img, lbl = tmp_path / "images.idx", tmp_path / "labels.idx"
    write_idx(img, lbl, images, labels)
    return img, lbl


def test_idx_decode(tmp_path: Path) -> None:
    images = np.zeros((2, 4, 4), dtype=np.uint8)
    images[0, 0, 0] = 255
    img, lbl = _write_pair(tmp_path, images, np.array([0, 2]))
    assert img.read_bytes()[:4] == bytes([0x00, 0x00, 0x08, 0x03])

    data = load_idx(img, lbl)
    assert len(data) == 2
    assert data.input_dim == 16
    assert data.inputs[0, 0] == 1.0
    assert data.inputs[1, 5] == 0.0
    assert list(data.labels) == [1, 3]
    assert data.num_classes == 3


def test_idx_round_trip_bytes(tmp_path: Path) -> None:
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(5, 3, 2), dtype=np.uint8)
    labels = rng.integers(0, 4, size=5)
    img, lbl = _write_pair(tmp_path, images, labels)
    data = load_idx(img, lbl)
    recovered = np.rint(data.inputs * 255.0).astype(np.uint8).reshape(images.shape)
    assert np.array_equal(recovered, images)
    assert np.array_equal(data.labels - 1, labels)


def test_idx_count_mismatch(tmp_path: Path) -> None:
    img, lbl = _write_pair(tmp_path, np.zeros((10, 2, 2), dtype=np.uint8), np.zeros(9))
    with pytest.raises(DatasetFormatError, match="不一致"):
        load_idx(img, lbl)


def test_idx_magic_and_truncation(tmp_path: Path) -> None:
    img, lbl = _write_pair(tmp_path, np.zeros((3, 2, 2), dtype=np.uint8), np.zeros(3))
    with pytest.raises(DatasetFormatError, match="魔数"):
        load_idx(lbl, img)
    img.write_bytes(img.read_bytes()[:-1])
    with pytest.raises(DatasetFormatError, match="截断"):
        load_idx(img, lbl)


def test_idx_short_header_after_magic(tmp_path: Path) -> None:
    img, lbl = _write_pair(tmp_path, np.zeros((3, 2, 2), dtype=np.uint8), np.zeros(3))
    img.write_bytes(struct.pack(">II", 0x803, 3))
    with pytest.raises(DatasetFormatError, match="文件头不完整"):
        load_idx(img, lbl)
    img.write_bytes(b"\x00\x00")
    with pytest.raises(DatasetFormatError, match="文件头不完整"):
        load_idx(img, lbl)


def test_idx_empty(tmp_path: Path) -> None:
    img, lbl = tmp_path / "i.idx", tmp_path / "l.idx"
    img.write_bytes(struct.pack(">IIII", 0x803, 0, 2, 2))
    lbl.write_bytes(struct.pack(">II", 0x801, 0))
    with pytest.raises(EmptyDatasetError):
        load_idx(img, lbl)


def test_csv_single_row(tmp_path: Path) -> None:
    path = tmp_path / "one.csv"
    path.write_text("1,0.0,1.0\n")
    data = load_csv(path)
    assert len(data) == 1
    assert data.input_dim == 2
    assert data.example(0).y == 1
    assert isinstance(data.example(0), LabeledExample)


def test_csv_errors_name_row(tmp_path: Path) -> None:
    path = tmp_path / "bad.csv"
    path.write_text("1,0.5,0.5\n2,1.5,0.0\n")
    with pytest.raises(DatasetFormatError, match="第 2 行"):
        load_csv(path)
    path.write_text("1,0.5,0.5\n2,0.1\n")
    with pytest.raises(DatasetFormatError, match="第 2 行"):
        load_csv(path)
    path.write_text("1,0.5,abc\n")
    with pytest.raises(DatasetFormatError, match="第 1 行"):
        load_csv(path)


def test_csv_empty(tmp_path: Path) -> None:
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(EmptyDatasetError):
        load_csv(path)


def test_blobs_deterministic_and_bounded() -> None:
    first = make_synthetic_blobs(4, 3, 25, 0.2, seed=7)
    second = make_synthetic_blobs(4, 3, 25, 0.2, seed=7)
    assert np.array_equal(first.inputs, second.inputs)
    assert np.array_equal(first.labels, second.labels)
    assert first.inputs.min() >= 0.0 and first.inputs.max() <= 1.0
    assert len(first) == 100
    assert not np.array_equal(first.inputs, make_synthetic_blobs(4, 3, 25, 0.2, seed=8).inputs)


def test_blobs_zero_spread_sits_on_centers() -> None:
    data = make_synthetic_blobs(3, 2, 10, 0.0, seed=1)
    for label in (1, 2, 3):
        points = data.inputs[data.labels == label]
        assert np.all(points == points[0])


def test_blobs_rejects_small_shapes() -> None:
    with pytest.raises(ValueError):
        make_synthetic_blobs(2, 2, 10, 0.1, seed=0)
    with pytest.raises(ValueError):
        make_synthetic_blobs(3, 1, 10, 0.1, seed=0)


def test_dataset_split_is_seeded_partition() -> None:
    data = make_synthetic_blobs(3, 2, 20, 0.1, seed=0)
    train, test = data.split(0.25, seed=3)
    assert len(train) + len(test) == len(data)
    assert len(test) == 15
    again_train, again_test = data.split(0.25, seed=3)
    assert np.array_equal(test.inputs, again_test.inputs)
    assert test.name.endswith("/test")


def test_dataset_validates_range() -> None:
    with pytest.raises(DatasetFormatError):
        Dataset("bad", 3, np.array([[0.5, 1.2]]), np.array([1]))
    with pytest.raises(DatasetFormatError):
        Dataset("bad", 3, np.array([[0.5, 0.2]]), np.array([4]))
    with pytest.raises(EmptyDatasetError):
        Dataset("bad", 3, np.zeros((0, 2)), np.zeros(0))


def test_resolve_dataset_sources(tmp_path: Path) -> None:
    assert parse_blob_spec("k=5,d=3")["k"] == 5
    data = resolve_dataset("blobs:k=4,d=3,per_class=5,seed=2")
    assert data.num_classes == 4 and data.input_dim == 3 and len(data) == 20

    path = tmp_path / "rows.csv"
    path.write_text("1,0.1\n3,0.9\n")
    assert len(resolve_dataset(str(path))) == 2
    assert len(resolve_dataset(f"csv:{path}")) == 2
    with pytest.raises(DatasetFormatError):
        resolve_dataset("parquet:foo")
    with pytest.raises(DatasetFormatError):
        parse_blob_spec("colour=red")
