"""配置加载支持。"""

from __future__ import annotations

import os
import tomllib
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import structlog

ChangeCallback = Callable[[dict[str, Any]], None]

APP_CONFIG_PATH = "config/sdmlab.toml"
HOME_ENV = "SDMLAB_HOME"

logger = structlog.get_logger(__name__)


@dataclass
class _ConfigCacheEntry:
    data: dict[str, Any]
    mtime: float


class ConfigLoader:
    """加载并缓存 TOML 配置；文件修改后自动重载。"""

    def __init__(self, base_dir: Path | None = None) -> None:
        self._base_dir = base_dir
        self._cache: dict[str, _ConfigCacheEntry] = {}
        self._subscribers: dict[str, list[ChangeCallback]] = defaultdict(list)

    @property
    def base_dir(self) -> Path:
        """未显式指定时，每次访问都重新读取 SDMLAB_HOME。"""

        return self._base_dir or _default_base_dir()

    def resolve(self, relative_path: str | Path) -> Path:
        path = Path(relative_path)
        return path if path.is_absolute() else self.base_dir / path

    def load(self, relative_path: str | Path, *, force: bool = False) -> dict[str, Any]:
        """加载配置；若文件更新则自动重载。"""

        path = self.resolve(relative_path)
        key = str(path)
        stat = path.stat()
        entry = self._cache.get(key)
        if force or entry is None or stat.st_mtime > entry.mtime:
            with path.open("rb") as fp:
                data = tomllib.load(fp)
            self._cache[key] = _ConfigCacheEntry(data=data, mtime=stat.st_mtime)
            logger.debug("config_loaded", path=str(path))
            self._emit(str(relative_path), data)
            return data
        return entry.data

    def load_optional(self, relative_path: str | Path) -> dict[str, Any]:
        """与 load 相同，但文件不存在时返回空配置。"""

        if not self.resolve(relative_path).exists():
            return {}
        return self.load(relative_path)

    def subscribe(self, relative_path: str, callback: ChangeCallback) -> None:
        """订阅配置变更通知。"""

        self._subscribers[relative_path].append(callback)

    def _emit(self, relative_path: str, data: dict[str, Any]) -> None:
        for callback in self._subscribers.get(relative_path, []):
            callback(data)


def _default_base_dir() -> Path:
    home = os.environ.get(HOME_ENV)
    if home:
        return Path(home).expanduser().resolve()
    return Path(__file__).resolve().parents[2]


config_loader = ConfigLoader()


def get_app_config() -> dict[str, Any]:
    """获取全局应用配置（缺失时为空）。"""

    return config_loader.load_optional(APP_CONFIG_PATH)


def get_section(name: str) -> dict[str, Any]:
    """读取应用配置中的某个小节。"""

    section = get_app_config().get(name, {})
    return dict(section) if isinstance(section, dict) else {}


def load_toml_file(path: str | Path) -> dict[str, Any]:
    """读取任意 TOML 文件（基准配置等），相对路径按当前目录解析。"""

    with Path(path).open("rb") as fp:
        return tomllib.load(fp)
