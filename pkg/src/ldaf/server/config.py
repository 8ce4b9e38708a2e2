"""Application configuration loaded from a JSON file."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


class ConfigError(ValueError):
    pass


@dataclass
class CollectionSpec:
    path: str
    class_iri: Optional[str] = None
    template: Optional[str] = None


@dataclass
class AppConfig:
    base_url: str
    port: int = 8080
    data_dir: Path = Path("data")
    ontology_file: Optional[Path] = None
    app_dir: Path = Path(".")
    default_page_size: int = 20
    session_ttl_minutes: int = 1440
    upload_max_bytes: int = 5_000_000
    collections: list[CollectionSpec] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.base_url or self.base_url.endswith("/"):
            raise ConfigError("base_url must be absolute and have no trailing slash")
        if "://" not in self.base_url:
            raise ConfigError("base_url must be an absolute URL")
        if not 1 <= self.port <= 65535:
            raise ConfigError("port must be in 1..65535")
        if self.default_page_size < 1:
            raise ConfigError("default_page_size must be at least 1")
        if self.session_ttl_minutes < 1:
            raise ConfigError("session_ttl_minutes must be at least 1")
        if self.upload_max_bytes < 1:
            raise ConfigError("upload_max_bytes must be at least 1")
        seen = set()
        for spec in self.collections:
            if not spec.path or "/" in spec.path:
                raise ConfigError(f"bad collection path segment {spec.path!r}")
            if spec.path in seen:
                raise ConfigError(f"duplicate collection {spec.path!r}")
            seen.add(spec.path)

    @property
    def templates_dir(self) -> Path:
        return self.app_dir / "templates"

    @property
    def uploads_dir(self) -> Path:
        return self.app_dir / "uploads"

    @property
    def webui_dir(self) -> Path:
        return self.app_dir / "webui"

    def collection(self, path_segment: str) -> Optional[CollectionSpec]:
        for spec in self.collections:
            if spec.path == path_segment:
                return spec
        return None


def load_config(path: Path | str) -> AppConfig:
    """Read the JSON config; relative paths resolve against the file's directory."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text("utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    base = path.resolve().parent

    def respath(value: Optional[str]) -> Optional[Path]:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    collections = []
    for entry in raw.get("collections", []):
        if not isinstance(entry, dict) or "path" not in entry:
            raise ConfigError(f"bad collection entry: {entry!r}")
        collections.append(
            CollectionSpec(entry["path"], entry.get("class"), entry.get("template"))
        )
    known = {
        "base_url", "port", "data_dir", "ontology_file", "app_dir",
        "default_page_size", "session_ttl_minutes", "upload_max_bytes", "collections",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "base_url" not in raw:
        raise ConfigError("config needs a base_url")
    try:
        return AppConfig(
            base_url=raw["base_url"],
            port=raw.get("port", 8080),
            data_dir=respath(raw.get("data_dir", "data")),
            ontology_file=respath(raw.get("ontology_file")),
            app_dir=respath(raw.get("app_dir", ".")),
            default_page_size=raw.get("default_page_size", 20),
            session_ttl_minutes=raw.get("session_ttl_minutes", 1440),
            upload_max_bytes=raw.get("upload_max_bytes", 5_000_000),
            collections=collections,
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
