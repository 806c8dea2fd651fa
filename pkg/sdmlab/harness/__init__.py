"""实验引擎：错误率评估、对抗训练、基准表与诊断。"""

from sdmlab.harness.adversarial import INNER_TOTAL_STEPS, adversarial_train
from sdmlab.harness.bench import (
    CSV_HEADER,
    AttackGridConfig,
    BenchConfig,
    BenchConfigError,
    BenchReport,
    BenchRow,
    MonotonicityViolation,
    VictimConfig,
    cost_effectiveness_summary,
    load_bench_config,
    run_benchmark,
)
from sdmlab.harness.diagnose import (
    REFERENCE_LOGITS,
    REFERENCE_TRUE_LABEL,
    DiagnosticReport,
    DiagnosticRow,
    HighLossPair,
    diagnose,
    diagnose_logits,
    find_high_loss_pair,
    reference_report,
    search_high_loss_pair,
)
from sdmlab.harness.evaluate import AttackSetting, attack_dataset, evaluate_error_rate
from sdmlab.harness.tracker import RunRecord, RunTracker, Timer

__all__ = [
    "CSV_HEADER",
    "INNER_TOTAL_STEPS",
    "REFERENCE_LOGITS",
    "REFERENCE_TRUE_LABEL",
    "AttackGridConfig",
    "AttackSetting",
    "BenchConfig",
    "BenchConfigError",
    "BenchReport",
    "BenchRow",
    "DiagnosticReport",
    "DiagnosticRow",
    "HighLossPair",
    "MonotonicityViolation",
    "RunRecord",
    "RunTracker",
    "Timer",
    "VictimConfig",
    "adversarial_train",
    "attack_dataset",
    "cost_effectiveness_summary",
    "diagnose",
    "diagnose_logits",
    "evaluate_error_rate",
    "find_high_loss_pair",
    "load_bench_config",
    "reference_report",
    "run_benchmark",
    "search_high_loss_pair",
]
