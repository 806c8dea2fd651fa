"""攻击目标函数。"""

from sdmlab.losses.dpdr import (
    DEFAULT_DELTA_FLOOR,
    DEFAULT_ZETA,
    DeltaPolicy,
    DpdrContext,
    DpdrDenominatorError,
    DpdrTerms,
    build_dpdr_context,
    dpdr_loss,
    dpdr_terms,
)
from sdmlab.losses.objectives import (
    LossConfigError,
    cross_entropy,
    label_index,
    label_indices,
    neg_true_prob,
    predicted_label,
    predicted_labels,
    prob_diff,
    prob_diffs,
    runner_up_label,
)
from sdmlab.losses.spec import LossKind, LossPlan, LossSpec

__all__ = [
    "DEFAULT_DELTA_FLOOR",
    "DEFAULT_ZETA",
    "DeltaPolicy",
    "DpdrContext",
    "DpdrDenominatorError",
    "DpdrTerms",
    "LossConfigError",
    "LossKind",
    "LossPlan",
    "LossSpec",
    "build_dpdr_context",
    "cross_entropy",
    "dpdr_loss",
    "dpdr_terms",
    "label_index",
    "label_indices",
    "neg_true_prob",
    "predicted_label",
    "predicted_labels",
    "prob_diff",
    "prob_diffs",
    "runner_up_label",
]
