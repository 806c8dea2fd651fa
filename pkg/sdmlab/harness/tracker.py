"""基准运行记录：计时与 JSONL 运行日志。"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from time import perf_counter
from typing import Any, Iterable


@dataclass
class RunRecord:
    defense: str
    attack: str
    norm: str
    epsilon: float
    total_steps: int
    error_rate: float
    seed: int
    dataset: str
    batch_size: int | None
    model_digest: str
    wall_ms: float = 0.0
    extra: dict[str, Any] = field(default_factory=dict)


class Timer:
    def __enter__(self) -> "Timer":
        self.start = perf_counter()
        self.duration = 0.0
        return self

    def __exit__(self, exc_type, exc, tb) -> None:  # noqa: D401
        self.duration = perf_counter() - self.start

    @property
    def millis(self) -> float:
        return self.duration * 1000.0


class RunTracker:
    """把每条基准记录追加到 JSONL 运行日志。"""

    def __init__(self, log_path: str | Path) -> None:
        self._log_path = Path(log_path)
        self._log_path.parent.mkdir(parents=True, exist_ok=True)

    def record(self, run: RunRecord) -> None:
        payload = {"timestamp": datetime.now(timezone.utc).isoformat(), **asdict(run)}
        with self._log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(payload, ensure_ascii=False) + "\n")

    def bulk_record(self, runs: Iterable[RunRecord]) -> None:
        for run in runs:
            self.record(run)
