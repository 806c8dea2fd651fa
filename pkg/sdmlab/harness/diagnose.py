"""高损失非对抗样本诊断。

对每个被攻击的输入给出 logits、概率、交叉熵、预测标签与攻击结果，
并在攻击访问过的迭代点中寻找“交叉熵更高却仍被正确分类、
交叉熵更低却已被误分类”的一对样本。
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt
import structlog

from sdmlab.attacks.registry import AttackRegistry, get_registry
from sdmlab.data.base import Dataset, LabeledExample
from sdmlab.harness.evaluate import AttackSetting, attack_dataset, check_compatible
from sdmlab.losses.objectives import cross_entropy, label_index, predicted_label
from sdmlab.net.mlp import Mlp, forward_logits
from sdmlab.tensor.ops import Logits, ProbVector, as_tensor, softmax

logger = structlog.get_logger(__name__)

# 两个真实标签为 4 的对抗样本的 logits：前者损失更高但攻击失败，后者损失更低却攻击成功。
REFERENCE_TRUE_LABEL = 4
REFERENCE_LOGITS: tuple[tuple[float, ...], tuple[float, ...]] = (
    (0.314, -1.267, -0.126, 1.438, 0.264, 1.036, 0.191, -0.118, -0.498, -1.041),
    (-0.674, -1.434, -0.398, 2.864, -0.488, 3.367, -0.371, -0.613, -1.421, -0.833),
)


@dataclass(frozen=True)
class DiagnosticRow:
    source: str
    true_label: int
    logits: Logits
    probs: ProbVector
    loss: float
    predicted: int

    @property
    def successful(self) -> bool:
        return self.predicted != self.true_label

    @property
    def result(self) -> str:
        return "Successful" if self.successful else "Failed"

    def format(self, precision: int = 3) -> str:
        logits = " ".join(f"{v:+.{precision}f}" for v in self.logits)
        probs = " ".join(f"{100 * v:5.2f}%" for v in self.probs)
        return (
            f"{self.source}\n  S: {logits}\n  P: {probs}\n"
            f"  loss={self.loss:.3f} pred={self.predicted} y={self.true_label} {self.result}"
        )


@dataclass(frozen=True)
class HighLossPair:
    """failed 的交叉熵高于 successful，但 failed 仍被正确分类。"""

    failed: DiagnosticRow
    successful: DiagnosticRow

    @property
    def loss_gap(self) -> float:
        return self.failed.loss - self.successful.loss


@dataclass
class DiagnosticReport:
    rows: list[DiagnosticRow]
    high_loss_pair: HighLossPair | None = None
    candidates: list[DiagnosticRow] = field(default_factory=list)


def diagnose_logits(logits: npt.ArrayLike, y: int, source: str = "logits") -> DiagnosticRow:
    scores = as_tensor(logits, ndim=1, name="logits")
    label_index(y, scores.shape[0])
    probs = softmax(scores)
    return DiagnosticRow(
        source=source,
        true_label=int(y),
        logits=scores,
        probs=probs,
        loss=cross_entropy(probs, y),
        predicted=predicted_label(scores),
    )


def reference_report() -> DiagnosticReport:
    """内置的两行参考 logits（无需模型）。"""

    rows = [
        diagnose_logits(scores, REFERENCE_TRUE_LABEL, source=f"x'({i})")
        for i, scores in enumerate(REFERENCE_LOGITS, start=1)
    ]
    return DiagnosticReport(rows=rows, high_loss_pair=find_high_loss_pair(rows), candidates=rows)


def find_high_loss_pair(rows: Iterable[DiagnosticRow]) -> HighLossPair | None:
    """取正确分类中损失最高者与误分类中损失最低者；前者损失更高时即构成一对。"""

    failed = [row for row in rows if not row.successful]
    successful = [row for row in rows if row.successful]
    if not failed or not successful:
        return None
    worst_failed = max(failed, key=lambda row: row.loss)
    mildest_success = min(successful, key=lambda row: row.loss)
    if worst_failed.loss > mildest_success.loss:
        return HighLossPair(worst_failed, mildest_success)
    return None


def _row_for(model: Mlp, x: npt.ArrayLike, y: int, source: str) -> DiagnosticRow:
    return diagnose_logits(forward_logits(model, np.asarray(x, dtype=np.float64)), y, source)


def diagnose(
    model: Mlp,
    example: LabeledExample,
    attacks: Sequence[AttackSetting],
    *,
    include_trace: bool = True,
    registry: AttackRegistry | None = None,
) -> DiagnosticReport:
    """首行为干净输入，每个攻击的最终迭代点各一行；只在攻击迭代点中搜索高损失对，include_trace 时含访问过的迭代点。"""

    registry = registry or get_registry()
    rows = [_row_for(model, example.x, example.y, "clean")]
    candidates: list[DiagnosticRow] = []
    for attack in attacks:
        cfg = replace(attack.cfg, record_trace=include_trace)
        outcome = registry.run(attack.name, model, example.x.reshape(1, -1), [example.y], cfg, attack.total_steps)[0]
        final = _row_for(model, outcome.x_adv, example.y, attack.name)
        rows.append(final)
        candidates.append(final)
        for record in outcome.trace:
            source = f"{attack.name}[c{record.cycle} n{record.stage} t{record.step}]"
            candidates.append(_row_for(model, record.x, example.y, source))
    return DiagnosticReport(rows=rows, high_loss_pair=find_high_loss_pair(candidates), candidates=candidates)


def search_high_loss_pair(
    model: Mlp,
    dataset: Dataset,
    attacks: Sequence[AttackSetting],
    *,
    limit: int | None = None,
    registry: AttackRegistry | None = None,
) -> tuple[int, HighLossPair] | None:
    """逐样本检查各攻击的迭代点，返回第一个出现高损失对的样本下标及该对。"""

    check_compatible(model, dataset)
    data = dataset if limit is None else dataset.head(limit)
    per_attack = [
        attack_dataset(model, data, replace(attack, cfg=replace(attack.cfg, record_trace=True)), registry=registry)
        for attack in attacks
    ]
    for i in range(len(data)):
        y = int(data.labels[i])
        candidates = []
        for attack, outcomes in zip(attacks, per_attack):
            outcome = outcomes[i]
            xs = [record.x for record in outcome.trace] + [outcome.x_adv]
            logits = forward_logits(model, np.stack(xs))
            candidates.extend(
                diagnose_logits(scores, y, source=f"{attack.name}#{j}") for j, scores in enumerate(logits)
            )
        pair = find_high_loss_pair(candidates)
        if pair is not None:
            logger.info("high_loss_pair_found", index=i, loss_gap=pair.loss_gap)
            return i, pair
    return None
