from __future__ import annotations

import numpy as np
import pytest

from sdmlab.data import Dataset, make_synthetic_blobs
from sdmlab.net import Mlp, init_mlp, sgd_train

VICTIM_BLOBS = {"num_classes": 6, "dim": 8, "per_class": 200, "spread": 0.12, "seed": 0}
VICTIM_HIDDEN = [32]
VICTIM_TRAINING = {"lr": 0.5, "epochs": 40, "batch_size": 32, "seed": 0}

HIGH_LOSS_LOGITS = (
    [0.314, -1.267, -0.126, 1.438, 0.264, 1.036, 0.191, -0.118, -0.498, -1.041],
    [-0.674, -1.434, -0.398, 2.864, -0.488, 3.367, -0.371, -0.613, -1.421, -0.833],
)
HIGH_LOSS_PROBS = (
    [0.0983, 0.0202, 0.0633, 0.3025, 0.0935, 0.2024, 0.0869, 0.0638, 0.0436, 0.0254],
    [0.0101, 0.0047, 0.0133, 0.3474, 0.0122, 0.5745, 0.0137, 0.0107, 0.0048, 0.0086],
)


def zero_model(dim: int, num_classes: int, bias: list[float] | None = None) -> Mlp:
    b = np.zeros(num_classes) if bias is None else np.asarray(bias, dtype=np.float64)
    return Mlp((np.zeros((dim, num_classes)),), (b,))


def random_model(dims: list[int], seed: int) -> Mlp:
    return init_mlp(dims, seed)


@pytest.fixture(scope="session")
def victim_data() -> tuple[Dataset, Dataset]:
    return make_synthetic_blobs(**VICTIM_BLOBS).split(0.5, 0)


@pytest.fixture(scope="session")
def victim(victim_data: tuple[Dataset, Dataset]) -> Mlp:
    train, _ = victim_data
    dims = [train.input_dim, *VICTIM_HIDDEN, train.num_classes]
    return sgd_train(init_mlp(dims, VICTIM_TRAINING["seed"]), train, **VICTIM_TRAINING)
