"""对抗攻击：FGSM / PGD 基线、SDM 与步数预设。"""

from sdmlab.attacks.base import (
    L2_ALPHA,
    L2_EPSILON,
    LINF_ALPHA,
    LINF_EPSILON,
    AttackConfig,
    AttackConfigError,
    AttackError,
    AttackOutcome,
    BudgetViolationError,
    Norm,
    StepRecord,
)
from sdmlab.attacks.fgsm import fgsm, fgsm_batch
from sdmlab.attacks.pgd import pgd, pgd_batch
from sdmlab.attacks.registry import AttackRegistry, AttackSpec, UnknownAttackError, default_registry, get_registry
from sdmlab.attacks.schedule import SCHEDULES, Schedule, UnknownScheduleError, schedule_lookup, supported_totals
from sdmlab.attacks.sdm import sdm_attack, sdm_batch, stage_loss
from sdmlab.attacks.step import check_budget, perturbation_norms, project_perturbation, random_start, step_update

__all__ = [
    "L2_ALPHA",
    "L2_EPSILON",
    "LINF_ALPHA",
    "LINF_EPSILON",
    "SCHEDULES",
    "AttackConfig",
    "AttackConfigError",
    "AttackError",
    "AttackOutcome",
    "AttackRegistry",
    "AttackSpec",
    "BudgetViolationError",
    "Norm",
    "Schedule",
    "StepRecord",
    "UnknownAttackError",
    "UnknownScheduleError",
    "check_budget",
    "default_registry",
    "fgsm",
    "fgsm_batch",
    "get_registry",
    "pgd",
    "pgd_batch",
    "perturbation_norms",
    "project_perturbation",
    "random_start",
    "schedule_lookup",
    "sdm_attack",
    "sdm_batch",
    "stage_loss",
    "step_update",
    "supported_totals",
]
