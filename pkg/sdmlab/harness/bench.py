"""基准运行：受害模型 × 攻击 × (范数, ε, 总步数) 的错误率表。"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from sdmlab.attacks.base import AttackConfig, Norm
from sdmlab.attacks.registry import AttackRegistry, UnknownAttackError, get_registry
from sdmlab.attacks.schedule import UnknownScheduleError, schedule_lookup
from sdmlab.core.config import load_toml_file
from sdmlab.data import resolve_dataset
from sdmlab.data.base import Dataset
from sdmlab.harness.adversarial import INNER_TOTAL_STEPS, adversarial_train
from sdmlab.harness.evaluate import AttackSetting, evaluate_error_rate
from sdmlab.harness.tracker import RunRecord, RunTracker, Timer
from sdmlab.net.mlp import Mlp, init_mlp
from sdmlab.net.serialization import load_model, model_digest
from sdmlab.net.train import sgd_train

logger = structlog.get_logger(__name__)

CSV_HEADER = ("defense", "attack", "norm", "epsilon", "total_steps", "error_rate", "wall_ms", "seed")
CLEAN = "clean"
COST_STEPS = (10, 20, 50, 100)
DEFAULT_TOLERANCE = 0.005


class BenchConfigError(ValueError):
    """基准配置非法（未知攻击/防御、模型文件缺失等）。"""


class VictimConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str | None = None
    defense: Literal["none", "pgd-at", "sdm-at"] = "none"
    model: Path | None = None
    hidden: list[int] = Field(default_factory=lambda: [32])
    epochs: int = Field(default=30, ge=0)
    lr: float = Field(default=0.1, ge=0)
    batch_size: int = Field(default=32, ge=1)
    seed: int = 0
    inner_norm: Norm = Norm.LINF
    inner_epsilon: float | None = None
    inner_alpha: float | None = None
    inner_steps: int = INNER_TOTAL_STEPS

    @property
    def label(self) -> str:
        return self.name or self.defense


class AttackGridConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    norm: Norm = Norm.LINF
    epsilon: list[float]
    alpha: float | None = None
    alpha_ratio: float | None = None
    total_steps: list[int] = Field(default_factory=lambda: [10, 100])
    random_start: bool = False
    track_best: bool = True

    @field_validator("epsilon", "total_steps", mode="before")
    @classmethod
    def _scalar_to_list(cls, value: Any) -> Any:
        return value if isinstance(value, list) else [value]

    def config_for(self, epsilon: float, seed: int) -> AttackConfig:
        default = AttackConfig.default_for(self.norm)
        if self.alpha is not None:
            alpha = self.alpha
        elif self.alpha_ratio is not None and epsilon > 0:
            alpha = epsilon * self.alpha_ratio
        else:
            alpha = default.alpha
        return AttackConfig(
            norm=self.norm,
            epsilon=epsilon,
            alpha=alpha,
            seed=seed,
            random_start=self.random_start,
            track_best=self.track_best,
        )


class BenchConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dataset: str
    test_fraction: float = Field(default=0.5, gt=0, lt=1)
    seed: int = 0
    mode: Literal["grid", "cost"] = "grid"
    victims: list[VictimConfig] = Field(min_length=1)
    attacks: list[AttackGridConfig] = Field(min_length=1)
    workers: int = Field(default=1, ge=1)
    record_wall_time: bool = True
    use_best: bool = False
    batch_size: int | None = Field(default=None, ge=1)
    cost_steps: list[int] = Field(default_factory=lambda: list(COST_STEPS))
    tolerance: float = Field(default=DEFAULT_TOLERANCE, ge=0)
    out: Path | None = None
    run_log: Path | None = None

    @model_validator(mode="after")
    def _unique_victims(self) -> BenchConfig:
        labels = [victim.label for victim in self.victims]
        if len(set(labels)) != len(labels):
            raise ValueError(f"受害模型名称重复: {labels}")
        return self


def load_bench_config(path: str | Path) -> BenchConfig:
    try:
        data = load_toml_file(path)
    except FileNotFoundError as exc:
        raise BenchConfigError(f"基准配置不存在: {path}") from exc
    try:
        return BenchConfig.model_validate(data.get("bench", data))
    except ValidationError as exc:
        raise BenchConfigError(f"基准配置 {path} 非法:\n{exc}") from exc


@dataclass(frozen=True, order=True)
class BenchRow:
    defense: str
    attack: str
    norm: str
    epsilon: float
    total_steps: int
    error_rate: float = field(compare=False)
    wall_ms: float = field(compare=False)
    seed: int = field(compare=False)

    def csv_fields(self) -> list[str]:
        return [
            self.defense,
            self.attack,
            self.norm,
            repr(float(self.epsilon)),
            str(self.total_steps),
            f"{self.error_rate:.6f}",
            f"{self.wall_ms:.3f}",
            str(self.seed),
        ]


@dataclass
class BenchReport:
    rows: list[BenchRow]
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow(row.csv_fields())
        return buffer.getvalue()

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv(), encoding="utf-8")
        return path

    def rate(self, defense: str, attack: str, epsilon: float | None = None, total_steps: int | None = None) -> float:
        for row in self.rows:
            if row.defense != defense or row.attack != attack:
                continue
            if epsilon is not None and row.epsilon != epsilon:
                continue
            if total_steps is not None and row.total_steps != total_steps:
                continue
            return row.error_rate
        raise KeyError(f"报告中没有 {defense}/{attack} (ε={epsilon}, steps={total_steps})")


@dataclass(frozen=True)
class MonotonicityViolation:
    defense: str
    attack: str
    norm: str
    epsilon: float
    total_steps: int
    error_rate: float
    previous_best: float


def cost_effectiveness_summary(
    report: BenchReport, tolerance: float = DEFAULT_TOLERANCE
) -> list[MonotonicityViolation]:
    """列出错误率随总步数下降超过 tolerance 的点（相对此前最大值）。"""

    curves: dict[tuple[str, str, str, float], list[BenchRow]] = {}
    for row in report.rows:
        if row.attack == CLEAN:
            continue
        curves.setdefault((row.defense, row.attack, row.norm, row.epsilon), []).append(row)

    violations = []
    for (defense, attack, norm, epsilon), rows in sorted(curves.items()):
        best = float("-inf")
        for row in sorted(rows, key=lambda r: r.total_steps):
            if row.error_rate < best - tolerance:
                violations.append(
                    MonotonicityViolation(defense, attack, norm, epsilon, row.total_steps, row.error_rate, best)
                )
            best = max(best, row.error_rate)
    return violations


@dataclass(frozen=True)
class _Job:
    defense: str
    setting: AttackSetting

    @property
    def key(self) -> tuple[str, str, str, float, int]:
        return (self.defense, self.setting.name, self.setting.cfg.norm.value, self.setting.cfg.epsilon, self.setting.steps)


def build_victim(victim: VictimConfig, train: Dataset) -> Mlp:
    if victim.model is not None:
        if not victim.model.exists():
            raise BenchConfigError(f"模型文件不存在: {victim.model}")
        return load_model(victim.model)

    dims = [train.input_dim, *victim.hidden, train.num_classes]
    if victim.defense == "none":
        return sgd_train(init_mlp(dims, victim.seed), train, victim.lr, victim.epochs, victim.batch_size, victim.seed)

    inner_default = AttackConfig.default_for(victim.inner_norm)
    inner_cfg = AttackConfig(
        norm=victim.inner_norm,
        epsilon=victim.inner_epsilon if victim.inner_epsilon is not None else inner_default.epsilon,
        alpha=victim.inner_alpha if victim.inner_alpha is not None else inner_default.alpha,
        seed=victim.seed,
    )
    inner = AttackSetting(name=victim.defense.removesuffix("-at"), cfg=inner_cfg, total_steps=victim.inner_steps)
    return adversarial_train(
        train,
        dims,
        inner,
        epochs=victim.epochs,
        lr=victim.lr,
        seed=victim.seed,
        batch_size=victim.batch_size,
    )


def _expand_jobs(config: BenchConfig, registry: AttackRegistry) -> list[_Job]:
    jobs = []
    for grid in config.attacks:
        try:
            registry.get(grid.name)
        except UnknownAttackError as exc:
            raise BenchConfigError(str(exc)) from exc
        steps = config.cost_steps if config.mode == "cost" else grid.total_steps
        if grid.name == "fgsm":
            steps = [1]
        elif grid.name.startswith("sdm"):
            try:
                for total in steps:
                    schedule_lookup(total)
            except UnknownScheduleError as exc:
                raise BenchConfigError(str(exc)) from exc
        for epsilon in grid.epsilon:
            cfg = grid.config_for(epsilon, config.seed)
            for total in steps:
                setting = AttackSetting(name=grid.name, cfg=cfg, total_steps=None if grid.name == "fgsm" else total)
                jobs.extend(_Job(victim.label, setting) for victim in config.victims)
    return jobs


def run_benchmark(
    config: BenchConfig | str | Path,
    *,
    registry: AttackRegistry | None = None,
    out: str | Path | None = None,
) -> BenchReport:
    if not isinstance(config, BenchConfig):
        config = load_bench_config(config)
    registry = registry or get_registry()
    jobs = _expand_jobs(config, registry)

    dataset = resolve_dataset(config.dataset)
    train, test = dataset.split(config.test_fraction, config.seed)
    victims: dict[str, Mlp] = {}
    for victim in config.victims:
        with Timer() as timer:
            victims[victim.label] = build_victim(victim, train)
        logger.info("victim_ready", defense=victim.label, seconds=round(timer.duration, 3))

    def run_job(job: _Job) -> BenchRow:
        with Timer() as timer:
            rate = evaluate_error_rate(
                victims[job.defense],
                test,
                job.setting,
                batch_size=config.batch_size,
                use_best=config.use_best,
                registry=registry,
            )
        logger.info("bench_row", defense=job.defense, attack=job.setting.name, steps=job.setting.steps, error_rate=rate)
        cfg = job.setting.cfg
        return BenchRow(
            defense=job.defense,
            attack=job.setting.name,
            norm=cfg.norm.value,
            epsilon=cfg.epsilon,
            total_steps=job.setting.steps,
            error_rate=rate,
            wall_ms=timer.millis if config.record_wall_time else 0.0,
            seed=config.seed,
        )

    rows = []
    for label, model in victims.items():
        with Timer() as timer:
            rate = evaluate_error_rate(model, test)
        rows.append(
            BenchRow(label, CLEAN, "none", 0.0, 0, rate, timer.millis if config.record_wall_time else 0.0, config.seed)
        )
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            rows.extend(pool.map(run_job, jobs))
    else:
        rows.extend(run_job(job) for job in jobs)
    rows.sort()

    digests = {label: model_digest(model) for label, model in victims.items()}
    report = BenchReport(
        rows=rows,
        metadata={
            "dataset": dataset.name,
            "test_size": len(test),
            "seed": config.seed,
            "victim_seeds": {victim.label: victim.seed for victim in config.victims},
            "model_digests": digests,
            "batch_size": config.batch_size,
            "use_best": config.use_best,
            "mode": config.mode,
        },
    )

    if config.mode == "cost":
        violations = cost_effectiveness_summary(report, config.tolerance)
        report.metadata["monotonicity_violations"] = [vars(v) for v in violations]
        for violation in violations:
            logger.warning("cost_monotonicity_violation", **vars(violation))

    if config.run_log is not None:
        tracker = RunTracker(config.run_log)
        tracker.bulk_record(
            RunRecord(
                defense=row.defense,
                attack=row.attack,
                norm=row.norm,
                epsilon=row.epsilon,
                total_steps=row.total_steps,
                error_rate=row.error_rate,
                seed=row.seed,
                dataset=dataset.name,
                batch_size=config.batch_size,
                model_digest=digests[row.defense],
                wall_ms=row.wall_ms,
                extra={"use_best": config.use_best, "mode": config.mode},
            )
            for row in rows
        )

    target = out or config.out
    if target is not None:
        report.write_csv(target)
        logger.info("bench_written", path=str(target), rows=len(rows))
    return report
