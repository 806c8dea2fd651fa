"""张量原语与梯度校验。"""

from sdmlab.tensor.gradcheck import GradientOracleError, finite_difference_input_grad, relative_error
from sdmlab.tensor.ops import (
    Logits,
    ProbVector,
    Tensor,
    TensorShapeError,
    affine_forward,
    affine_input_grad,
    as_tensor,
    relu_forward,
    relu_input_grad,
    softmax,
    softmax_input_grad,
)

__all__ = [
    "GradientOracleError",
    "Logits",
    "ProbVector",
    "Tensor",
    "TensorShapeError",
    "affine_forward",
    "affine_input_grad",
    "as_tensor",
    "finite_difference_input_grad",
    "relative_error",
    "relu_forward",
    "relu_input_grad",
    "softmax",
    "softmax_input_grad",
]
