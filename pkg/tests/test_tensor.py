from __future__ import annotations

import numpy as np
import pytest

from sdmlab.tensor import (
    GradientOracleError,
    TensorShapeError,
    affine_forward,
    affine_input_grad,
    as_tensor,
    finite_difference_input_grad,
    relative_error,
    relu_forward,
    relu_input_grad,
    softmax,
    softmax_input_grad,
)
from tests.conftest import HIGH_LOSS_LOGITS, HIGH_LOSS_PROBS


def test_affine_identity_and_bias() -> None:
    x = as_tensor([[1.0, 2.0]])
    out = affine_forward(x, as_tensor(np.eye(2)), as_tensor([0.0, 0.0]))
    assert np.array_equal(out, [[1.0, 2.0]])

    rng = np.random.default_rng(3)
    out = affine_forward(as_tensor([[0.0, 0.0]]), as_tensor(rng.normal(size=(2, 2))), as_tensor([3.0, 4.0]))
    assert np.array_equal(out, [[3.0, 4.0]])


def test_affine_matches_naive_matmul() -> None:
    rng = np.random.default_rng(7)
    x = rng.normal(size=(2, 3))
    w = rng.normal(size=(3, 2))
    b = rng.normal(size=2)
    expected = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            expected[i, j] = sum(x[i, k] * w[k, j] for k in range(3)) + b[j]
    assert np.allclose(affine_forward(as_tensor(x), as_tensor(w), as_tensor(b)), expected, atol=1e-12)


def test_affine_shape_mismatch() -> None:
    with pytest.raises(TensorShapeError):
        affine_forward(as_tensor([[1.0, 2.0]]), as_tensor(np.eye(3)), as_tensor([0.0, 0.0, 0.0]))
    with pytest.raises(TensorShapeError):
        affine_input_grad(as_tensor(np.eye(2)), as_tensor([[1.0, 2.0, 3.0]]))


def test_relu_forward_and_subgradient() -> None:
    x = as_tensor([-1.0, 0.0, 2.0])
    assert np.array_equal(relu_forward(x), [0.0, 0.0, 2.0])
    assert np.array_equal(relu_input_grad(x, as_tensor([5.0, 5.0, 5.0])), [0.0, 0.0, 5.0])


def test_relu_grad_matches_finite_differences() -> None:
    rng = np.random.default_rng(11)
    x = rng.normal(size=(3, 4))
    x[np.abs(x) < 1e-3] = 0.5
    numeric = finite_difference_input_grad(lambda v: float(np.sum(relu_forward(v))), as_tensor(x))
    analytic = relu_input_grad(as_tensor(x), as_tensor(np.ones_like(x)))
    assert np.max(np.abs(numeric - analytic)) < 1e-6


def test_softmax_high_loss_rows() -> None:
    for logits, expected in zip(HIGH_LOSS_LOGITS, HIGH_LOSS_PROBS):
        probs = softmax(as_tensor(logits))
        assert np.max(np.abs(probs - np.array(expected))) < 5e-4
        assert abs(float(np.sum(probs)) - 1.0) < 1e-9


def test_softmax_uniform_and_shift_invariance() -> None:
    assert np.allclose(softmax(as_tensor([0.0, 0.0, 0.0, 0.0])), [0.25] * 4, atol=1e-15)
    logits = as_tensor(HIGH_LOSS_LOGITS[0])
    assert np.max(np.abs(softmax(logits + 1000.0) - softmax(logits))) < 1e-12


def test_softmax_rejects_single_class() -> None:
    with pytest.raises(TensorShapeError):
        softmax(as_tensor([[1.0]]))


def test_softmax_input_grad_matches_finite_differences() -> None:
    rng = np.random.default_rng(5)
    logits = as_tensor(rng.normal(size=(2, 5)))
    upstream = rng.normal(size=(2, 5))

    def objective(s: np.ndarray) -> float:
        return float(np.sum(softmax(s) * upstream))

    analytic = softmax_input_grad(softmax(logits), as_tensor(upstream))
    numeric = finite_difference_input_grad(objective, logits)
    assert relative_error(analytic, numeric) < 1e-6


def test_finite_difference_oracle_basics() -> None:
    grad = finite_difference_input_grad(lambda v: float(np.sum(v**2)), as_tensor([1.0, 2.0]))
    assert np.allclose(grad, [2.0, 4.0], atol=1e-6)
    assert np.array_equal(finite_difference_input_grad(lambda v: 3.0, as_tensor([1.0, 2.0])), [0.0, 0.0])


def test_finite_difference_rejects_non_finite() -> None:
    with pytest.raises(GradientOracleError):
        finite_difference_input_grad(lambda v: float("nan"), as_tensor([1.0]))
    with pytest.raises(ValueError):
        finite_difference_input_grad(lambda v: 0.0, as_tensor([1.0]), h=0.0)


def test_as_tensor_is_read_only() -> None:
    t = as_tensor([1.0, 2.0])
    with pytest.raises(ValueError):
        t[0] = 5.0
    with pytest.raises(TensorShapeError):
        as_tensor([1.0, 2.0], ndim=2)


def test_softmax_rows_are_positive_simplex_points() -> None:
    rng = np.random.default_rng(17)
    for _ in range(1000):
        classes = int(rng.integers(3, 21))
        logits = rng.normal(scale=rng.uniform(0.1, 10.0), size=classes)
        probs = softmax(as_tensor(logits))
        assert abs(float(np.sum(probs)) - 1.0) <= 1e-9
        assert np.all(probs > 0.0)


def test_layer_primitives_match_finite_differences() -> None:
    rng = np.random.default_rng(23)
    checked = 0
    while checked < 100:
        batch, d, hidden, classes = (int(v) for v in rng.integers([1, 2, 2, 3], [6, 7, 9, 8]))
        x = as_tensor(rng.uniform(size=(batch, d)))
        w1, b1 = as_tensor(rng.normal(size=(d, hidden))), as_tensor(rng.normal(size=hidden))
        w2, b2 = as_tensor(rng.normal(size=(hidden, classes))), as_tensor(rng.normal(size=classes))
        upstream = rng.normal(size=(batch, classes))
        z = affine_forward(x, w1, b1)
        if np.min(np.abs(z)) < 1e-3:
            continue

        def objective(v: np.ndarray) -> float:
            logits = affine_forward(relu_forward(affine_forward(v, w1, b1)), w2, b2)
            return float(np.sum(softmax(logits) * upstream))

        probs = softmax(affine_forward(relu_forward(z), w2, b2))
        d_logits = softmax_input_grad(probs, as_tensor(upstream))
        d_hidden = relu_input_grad(z, affine_input_grad(w2, d_logits))
        analytic = affine_input_grad(w1, d_hidden)
        numeric = finite_difference_input_grad(objective, x, h=1e-5)
        assert relative_error(analytic, numeric) < 1e-4
        checked += 1
