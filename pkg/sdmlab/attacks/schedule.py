"""总步数 ↔ (cycles, stages, steps) 预设表。"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Schedule:
    total: int
    cycles: int
    stages: int
    steps: int

    def __post_init__(self) -> None:
        if self.cycles * self.stages * self.steps != self.total:
            raise ValueError(f"预设不自洽: {self}")


SCHEDULES: dict[int, Schedule] = {
    s.total: s
    for s in (
        Schedule(10, 1, 5, 2),
        Schedule(20, 1, 5, 4),
        Schedule(50, 2, 5, 5),
        Schedule(100, 2, 5, 10),
        Schedule(200, 4, 5, 10),
        Schedule(500, 4, 5, 25),
        Schedule(1000, 5, 5, 40),
    )
}


class UnknownScheduleError(KeyError):
    """总步数不在预设表中。"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


def schedule_lookup(total: int) -> Schedule:
    try:
        return SCHEDULES[int(total)]
    except KeyError:
        supported = ", ".join(str(t) for t in sorted(SCHEDULES))
        raise UnknownScheduleError(
            f"不支持的总步数 {total}；可用预设: {supported}（自定义请显式给出 cycles/stages/steps）"
        ) from None


def supported_totals() -> list[int]:
    return sorted(SCHEDULES)
