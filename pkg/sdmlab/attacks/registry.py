"""攻击注册表：名字 → 批量攻击函数。"""

from __future__ import annotations

import importlib
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy.typing as npt

from sdmlab.attacks.base import AttackConfig, AttackOutcome
from sdmlab.attacks.fgsm import fgsm_batch
from sdmlab.attacks.pgd import pgd_batch
from sdmlab.attacks.sdm import sdm_batch
from sdmlab.losses.spec import LossSpec
from sdmlab.net.mlp import Mlp

# (模型, 批输入, 1 起始标签, 配置, 总步数或 None) -> 每个样本的结果
AttackRunner = Callable[[Mlp, npt.ArrayLike, npt.ArrayLike, AttackConfig, "int | None"], list[AttackOutcome]]


class UnknownAttackError(KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


@dataclass
class AttackSpec:
    id: str
    runner: AttackRunner
    entry: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)


def _sdm_config(cfg: AttackConfig, total_steps: int | None) -> AttackConfig:
    if total_steps is None or total_steps == cfg.total_steps:
        return cfg
    return cfg.with_total_steps(total_steps)


def _run_fgsm(model, x, y, cfg, total_steps=None):
    return fgsm_batch(model, x, y, cfg)


def _run_pgd(model, x, y, cfg, total_steps=None):
    return pgd_batch(model, x, y, cfg, total_steps or cfg.total_steps)


def _run_pgd_diff(model, x, y, cfg, total_steps=None):
    return pgd_batch(model, x, y, cfg, total_steps or cfg.total_steps, loss=LossSpec.prob_diff())


def _run_sdm(model, x, y, cfg, total_steps=None):
    return sdm_batch(model, x, y, _sdm_config(cfg, total_steps))


def _run_sdm_ce(model, x, y, cfg, total_steps=None):
    return sdm_batch(model, x, y, _sdm_config(cfg, total_steps), first_stage_loss=LossSpec.ce())


class AttackRegistry:
    def __init__(self) -> None:
        self._attacks: dict[str, AttackSpec] = {}

    def register(self, spec: AttackSpec) -> None:
        self._attacks[spec.id] = spec

    def register_entry(self, attack_id: str, entry: str, **metadata: Any) -> None:
        """按 ``module:attr`` 注册外部攻击函数。"""

        self.register(
            AttackSpec(id=attack_id, runner=self._import_callable(entry), entry=entry, metadata=metadata)
        )

    def get(self, attack_id: str) -> AttackSpec:
        try:
            return self._attacks[attack_id]
        except KeyError:
            raise UnknownAttackError(
                f"未知攻击 {attack_id!r}；可用: {', '.join(self.names())}"
            ) from None

    def names(self) -> list[str]:
        return sorted(self._attacks)

    def run(
        self,
        attack_id: str,
        model: Mlp,
        x: npt.ArrayLike,
        y: npt.ArrayLike,
        cfg: AttackConfig,
        total_steps: int | None = None,
    ) -> list[AttackOutcome]:
        return self.get(attack_id).runner(model, x, y, cfg, total_steps)

    @staticmethod
    def _import_callable(entry: str) -> AttackRunner:
        module_name, sep, attr = entry.partition(":")
        if not sep:
            raise ValueError(f"攻击入口需要写作 module:attr: {entry!r}")
        module = importlib.import_module(module_name)
        return getattr(module, attr)


def default_registry() -> AttackRegistry:
    registry = AttackRegistry()
    registry.register(AttackSpec("fgsm", _run_fgsm, metadata={"loss": "ce", "single_step": True}))
    registry.register(AttackSpec("pgd", _run_pgd, metadata={"loss": "ce"}))
    registry.register(AttackSpec("pgd-diff", _run_pgd_diff, metadata={"loss": "prob_diff"}))
    registry.register(AttackSpec("sdm", _run_sdm, metadata={"loss": "neg_true_prob+dpdr"}))
    registry.register(AttackSpec("sdm-ce", _run_sdm_ce, metadata={"loss": "ce+dpdr"}))
    return registry


_GLOBAL_REGISTRY: AttackRegistry | None = None


def get_registry() -> AttackRegistry:
    global _GLOBAL_REGISTRY
    if _GLOBAL_REGISTRY is None:
        _GLOBAL_REGISTRY = default_registry()
    return _GLOBAL_REGISTRY
