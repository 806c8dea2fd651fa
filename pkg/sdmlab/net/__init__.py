"""分类器 f：前向、输入梯度、训练与序列化。"""

from sdmlab.net.mlp import (
    Gradients,
    LossEvaluation,
    Mlp,
    ModelShapeError,
    evaluate_loss,
    forward_logits,
    frozen_objective,
    init_mlp,
    loss_input_gradient,
    predict_proba,
)
from sdmlab.net.serialization import (
    ModelFormatError,
    ModelTruncatedError,
    load_model,
    model_digest,
    save_model,
)
from sdmlab.net.train import TrainingError, sgd_train, train_loop

__all__ = [
    "Gradients",
    "LossEvaluation",
    "Mlp",
    "ModelFormatError",
    "ModelShapeError",
    "ModelTruncatedError",
    "TrainingError",
    "evaluate_loss",
    "forward_logits",
    "frozen_objective",
    "init_mlp",
    "load_model",
    "loss_input_gradient",
    "model_digest",
    "predict_proba",
    "save_model",
    "sgd_train",
    "train_loop",
]
