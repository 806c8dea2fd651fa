"""CLI 入口。"""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional

import typer

from sdmlab import get_version
from sdmlab.core.config import get_section

app = typer.Typer(help="SDM 对抗攻击引擎 CLI")


def _setting(section: str, key: str, value: Any, default: Any) -> Any:
    """命令行参数优先，其次 config/sdmlab.toml 的对应小节，最后是内置默认值。"""

    if value is not None:
        return value
    return get_section(section).get(key, default)


@contextmanager
def _cli_errors() -> Iterator[None]:
    try:
        yield
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        typer.secho(f"❌ {message}", fg="red", err=True)
        raise typer.Exit(1) from exc


def _parse_ints(text: str | list[int]) -> list[int]:
    if isinstance(text, list):
        return [int(part) for part in text]
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ValueError(f"需要逗号分隔的整数: {text!r}") from exc


def _load_split(dataset: str, test_fraction: float, seed: int):
    from sdmlab.data import resolve_dataset

    data = resolve_dataset(dataset)
    if test_fraction <= 0:
        return data, data
    return data.split(test_fraction, seed)


def _attack_config(
    norm: str,
    eps: Optional[float],
    alpha: Optional[float],
    seed: int,
    *,
    cycles: Optional[int] = None,
    stages: Optional[int] = None,
    steps: Optional[int] = None,
    **flags: Any,
):
    from sdmlab.attacks import AttackConfig

    section = get_section("attack")
    overrides: dict[str, Any] = {"seed": seed, **flags}
    eps = eps if eps is not None else section.get(f"{norm}_epsilon")
    alpha = alpha if alpha is not None else section.get(f"{norm}_alpha")
    if eps is not None:
        overrides["epsilon"] = float(eps)
    if alpha is not None:
        overrides["alpha"] = float(alpha)
    for key, value in (("cycles", cycles), ("stages", stages), ("steps", steps)):
        if value is not None:
            overrides[key] = value
    return AttackConfig.default_for(norm, **overrides)


@app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="日志级别（默认读取 [logging] level）"),
) -> None:
    """顶级 CLI 回调。"""
    from sdmlab.core.logging import setup_logging

    with _cli_errors():
        # 读取配置前先初始化，配置加载事件只写 stderr
        setup_logging(None, log_level or "WARNING")
        section = get_section("logging")
        setup_logging(section.get("output"), log_level or section.get("level", "WARNING"))


@app.command()
def version() -> None:
    """显示版本信息。"""
    typer.echo(get_version())


@app.command()
def schedule() -> None:
    """打印总步数预设表 (C, N, T)。"""
    from sdmlab.attacks import SCHEDULES

    typer.echo(f"{'total':>6} {'C':>3} {'N':>3} {'T':>3}")
    for total in sorted(SCHEDULES):
        s = SCHEDULES[total]
        typer.echo(f"{s.total:>6} {s.cycles:>3} {s.stages:>3} {s.steps:>3}")


@app.command()
def train(
    dataset: str = typer.Option(..., "--dataset", "-d", help="数据源：路径、idx:<img>,<lbl> 或 blobs:<k=v,...>"),
    model: Path = typer.Option(..., "--model", "-m", help="输出模型文件"),
    hidden: Optional[str] = typer.Option(None, "--hidden", help="隐藏层宽度，如 32,32"),
    epochs: Optional[int] = typer.Option(None, "--epochs"),
    lr: Optional[float] = typer.Option(None, "--lr"),
    batch_size: Optional[int] = typer.Option(None, "--batch-size"),
    seed: int = typer.Option(0, "--seed"),
    split_seed: int = typer.Option(0, "--split-seed", help="训练/测试划分种子（与攻击种子无关）"),
    test_fraction: Optional[float] = typer.Option(None, "--test-fraction", help="留作测试集的比例（0 表示不划分）"),
) -> None:
    """普通 SGD 训练受害模型。"""
    from sdmlab.harness import evaluate_error_rate
    from sdmlab.net import init_mlp, save_model, sgd_train

    with _cli_errors():
        train_set, test_set = _load_split(dataset, _setting("train", "test_fraction", test_fraction, 0.5), split_seed)
        dims = [train_set.input_dim, *_parse_ints(_setting("train", "hidden", hidden, "32")), train_set.num_classes]
        trained = sgd_train(
            init_mlp(dims, seed),
            train_set,
            _setting("train", "lr", lr, 0.1),
            _setting("train", "epochs", epochs, 30),
            _setting("train", "batch_size", batch_size, 32),
            seed,
        )
        save_model(trained, model)
        typer.secho(f"✅ 模型已保存：{model}", fg="green")
        typer.echo(f"clean error: train={evaluate_error_rate(trained, train_set):.4f} test={evaluate_error_rate(trained, test_set):.4f}")


@app.command()
def advtrain(
    dataset: str = typer.Option(..., "--dataset", "-d"),
    model: Path = typer.Option(..., "--model", "-m", help="输出模型文件"),
    inner: str = typer.Option("sdm", "--inner", help="内层攻击：pgd 或 sdm"),
    norm: str = typer.Option("linf", "--norm"),
    eps: Optional[float] = typer.Option(None, "--eps"),
    alpha: Optional[float] = typer.Option(None, "--alpha"),
    total_steps: int = typer.Option(10, "--total-steps"),
    hidden: Optional[str] = typer.Option(None, "--hidden"),
    epochs: Optional[int] = typer.Option(None, "--epochs"),
    lr: Optional[float] = typer.Option(None, "--lr"),
    batch_size: Optional[int] = typer.Option(None, "--batch-size"),
    seed: int = typer.Option(0, "--seed"),
    split_seed: int = typer.Option(0, "--split-seed", help="训练/测试划分种子（与攻击种子无关）"),
    test_fraction: Optional[float] = typer.Option(None, "--test-fraction"),
) -> None:
    """以 PGD 或 SDM 为内层攻击的对抗训练。"""
    from sdmlab.harness import AttackSetting, adversarial_train, evaluate_error_rate
    from sdmlab.net import save_model

    with _cli_errors():
        train_set, test_set = _load_split(dataset, _setting("train", "test_fraction", test_fraction, 0.5), split_seed)
        dims = [train_set.input_dim, *_parse_ints(_setting("train", "hidden", hidden, "32")), train_set.num_classes]
        setting = AttackSetting(inner, _attack_config(norm, eps, alpha, seed), total_steps)
        trained = adversarial_train(
            train_set,
            dims,
            setting,
            epochs=_setting("train", "epochs", epochs, 30),
            lr=_setting("train", "lr", lr, 0.1),
            seed=seed,
            batch_size=_setting("train", "batch_size", batch_size, 32),
        )
        save_model(trained, model)
        typer.secho(f"✅ 模型已保存：{model}", fg="green")
        typer.echo(f"clean error: test={evaluate_error_rate(trained, test_set):.4f}")


@app.command()
def attack(
    model: Path = typer.Option(..., "--model", "-m"),
    dataset: str = typer.Option(..., "--dataset", "-d"),
    attack_name: str = typer.Option("sdm", "--attack", "-a", help="fgsm | pgd | pgd-diff | sdm | sdm-ce"),
    norm: str = typer.Option("linf", "--norm"),
    eps: Optional[float] = typer.Option(None, "--eps"),
    alpha: Optional[float] = typer.Option(None, "--alpha"),
    total_steps: Optional[int] = typer.Option(None, "--total-steps", help="预设总步数（SDM 按预设表展开）"),
    cycles: Optional[int] = typer.Option(None, "--cycles"),
    stages: Optional[int] = typer.Option(None, "--stages"),
    steps: Optional[int] = typer.Option(None, "--steps"),
    seed: int = typer.Option(0, "--seed"),
    split_seed: int = typer.Option(0, "--split-seed", help="训练/测试划分种子（与攻击种子无关）"),
    batch_size: Optional[int] = typer.Option(None, "--batch-size", help="攻击批大小（默认整个数据集一批）"),
    track_best: bool = typer.Option(True, "--track-best/--no-track-best"),
    use_best: bool = typer.Option(False, "--use-best", help="按最优迭代点统计错误率"),
    random_start: bool = typer.Option(False, "--random-start"),
    test_fraction: Optional[float] = typer.Option(None, "--test-fraction"),
    defense: str = typer.Option("none", "--defense", help="CSV 中的 defense 列"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="输出 CSV"),
) -> None:
    """对数据集运行一次攻击并报告错误率。"""
    from sdmlab.harness import AttackSetting, BenchReport, BenchRow, Timer, evaluate_error_rate
    from sdmlab.net import load_model

    with _cli_errors():
        victim = load_model(model)
        _, test_set = _load_split(dataset, _setting("train", "test_fraction", test_fraction, 0.5), split_seed)
        cfg = _attack_config(
            norm,
            eps,
            alpha,
            seed,
            cycles=cycles,
            stages=stages,
            steps=steps,
            track_best=track_best,
            random_start=random_start,
        )
        setting = AttackSetting(attack_name, cfg, total_steps)
        clean = evaluate_error_rate(victim, test_set)
        with Timer() as timer:
            rate = evaluate_error_rate(victim, test_set, setting, batch_size=batch_size, use_best=use_best)
        typer.echo(f"clean error: {clean:.4f}")
        typer.echo(f"{attack_name} ({cfg.norm.value}, ε={cfg.epsilon:g}, steps={setting.steps}) error: {rate:.4f}")
        if out is not None:
            report = BenchReport(
                rows=sorted(
                    [
                        BenchRow(defense, "clean", "none", 0.0, 0, clean, 0.0, seed),
                        BenchRow(defense, attack_name, cfg.norm.value, cfg.epsilon, setting.steps, rate, timer.millis, seed),
                    ]
                ),
                metadata={"dataset": test_set.name, "batch_size": batch_size, "split_seed": split_seed},
            )
            report.write_csv(out)
            typer.secho(f"✅ 结果已写入：{out}", fg="green")


@app.command()
def bench(
    config: Path = typer.Argument(..., help="基准配置 TOML"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="覆盖配置中的输出 CSV"),
) -> None:
    """按配置运行受害模型 × 攻击 × 设置的完整基准。"""
    from sdmlab.harness import cost_effectiveness_summary, load_bench_config, run_benchmark

    with _cli_errors():
        cfg = load_bench_config(config)
        report = run_benchmark(cfg, out=out)
        typer.echo(report.to_csv(), nl=False)
        if cfg.mode == "cost":
            violations = cost_effectiveness_summary(report, cfg.tolerance)
            if violations:
                typer.secho(f"⚠️ {len(violations)} 处错误率随步数下降超过 {cfg.tolerance}", fg="yellow")
                for v in violations:
                    typer.echo(f"  {v.defense}/{v.attack} ε={v.epsilon:g} steps={v.total_steps}: {v.error_rate:.4f} < {v.previous_best:.4f}")
            else:
                typer.secho("✅ 错误率随总步数单调不减（容差内）", fg="green")


@app.command()
def diagnose(
    model: Optional[Path] = typer.Option(None, "--model", "-m", help="省略时输出内置的两行参考 logits"),
    dataset: Optional[str] = typer.Option(None, "--dataset", "-d"),
    index: Optional[int] = typer.Option(None, "--index", "-i", help="诊断第 i 个样本；省略时搜索高损失对"),
    attacks: str = typer.Option("pgd,sdm", "--attacks"),
    norm: str = typer.Option("linf", "--norm"),
    eps: Optional[float] = typer.Option(None, "--eps"),
    alpha: Optional[float] = typer.Option(None, "--alpha"),
    total_steps: int = typer.Option(100, "--total-steps"),
    seed: int = typer.Option(0, "--seed"),
    split_seed: int = typer.Option(0, "--split-seed", help="训练/测试划分种子（与攻击种子无关）"),
    limit: Optional[int] = typer.Option(None, "--limit", help="搜索时最多检查的样本数"),
) -> None:
    """诊断高损失却未攻击成功的样本。"""
    from sdmlab.harness import AttackSetting, reference_report, search_high_loss_pair
    from sdmlab.harness import diagnose as run_diagnose
    from sdmlab.net import load_model

    with _cli_errors():
        if model is None:
            report = reference_report()
            for row in report.rows:
                typer.echo(row.format())
            return
        if dataset is None:
            raise ValueError("指定 --model 时必须同时给出 --dataset")
        victim = load_model(model)
        data = _load_split(dataset, _setting("train", "test_fraction", None, 0.5), split_seed)[1]
        cfg = _attack_config(norm, eps, alpha, seed)
        settings = [AttackSetting(name.strip(), cfg, total_steps) for name in attacks.split(",") if name.strip()]
        if index is not None:
            report = run_diagnose(victim, data.example(index), settings)
            for row in report.rows:
                typer.echo(row.format())
            pair = report.high_loss_pair
        else:
            found = search_high_loss_pair(victim, data, settings, limit=limit)
            pair = found[1] if found else None
            if found:
                typer.echo(f"样本 #{found[0]}")
        if pair is None:
            typer.secho("未找到高损失却攻击失败的样本对", fg="yellow")
            return
        typer.secho(f"高损失对（损失差 {pair.loss_gap:.3f}）：", fg="cyan")
        typer.echo(pair.failed.format())
        typer.echo(pair.successful.format())
