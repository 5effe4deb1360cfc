"""Application settings: YAML files in standard locations, validated with pydantic."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from platformdirs import user_config_dir
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, field_validator
from pydantic import ValidationError as PydanticValidationError

from ..exceptions import ConfigurationError

logger = logging.getLogger(__name__)

APP_NAME = "netwave"
SETTINGS_FILENAME = "config.yaml"
DEFAULT_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TrackingSettings(_Section):
    delta: PositiveFloat = 0.02
    horizon: PositiveFloat = 10.0


class EngineSettings(_Section):
    max_events: PositiveInt = 10_000_000
    time_tolerance: PositiveFloat = 1e-12
    debug_checks: bool = False


class OutputSettings(_Section):
    snapshot_times: List[float] = Field(default_factory=list)
    phi_columns: bool = False

    @field_validator("snapshot_times")
    @classmethod
    def _non_negative(cls, value: List[float]) -> List[float]:
        if any(t < 0.0 for t in value):
            raise ValueError("snapshot times must be non-negative")
        return sorted(value)


class SweepSettings(_Section):
    workers: PositiveInt = 4


class LoggingSettings(_Section):
    level: str = "INFO"
    format: str = DEFAULT_LOG_FORMAT

    @field_validator("level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown logging level {value}")
        return level


class Settings(_Section):
    """Validated contents of the ``netwave`` section of a settings file."""

    tracking: TrackingSettings = Field(default_factory=TrackingSettings)
    engine: EngineSettings = Field(default_factory=EngineSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)
    sweep: SweepSettings = Field(default_factory=SweepSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)


def default_settings_paths() -> List[Path]:
    """Candidate settings files, most specific first."""
    return [
        Path.cwd() / SETTINGS_FILENAME,
        Path(user_config_dir(APP_NAME)) / SETTINGS_FILENAME,
    ]


def find_settings_file(explicit: Optional[Union[str, Path]] = None) -> Optional[Path]:
    """Explicit path if given, else the first existing default location."""
    if explicit is not None:
        path = Path(explicit)
        if not path.exists():
            raise ConfigurationError("Settings file not found", config_file=str(path))
        return path
    for candidate in default_settings_paths():
        if candidate.exists():
            return candidate
    return None


def parse_settings(data: Optional[Dict[str, Any]], source: Optional[str] = None) -> Settings:
    """Validate a loaded YAML mapping."""
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigurationError("Settings file must contain a mapping", config_file=source)
    section = data.get(APP_NAME, {}) or {}
    try:
        return Settings.model_validate(section)
    except PydanticValidationError as e:
        first = e.errors()[0]
        path = ".".join([APP_NAME] + [str(part) for part in first.get("loc", ())])
        raise ConfigurationError(first.get("msg", str(e)), path=path, config_file=source) from e


def load_settings(explicit: Optional[Union[str, Path]] = None) -> Settings:
    """Load settings from the first available file, or return the defaults."""
    path = find_settings_file(explicit)
    if path is None:
        logger.debug("No settings file found, using defaults")
        return Settings()
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigurationError(f"Cannot read settings: {e}", config_file=str(path)) from e
    logger.debug("Loaded settings from %s", path)
    return parse_settings(data, source=str(path))


def configure_logging(settings: LoggingSettings, debug: bool = False) -> None:
    """Configure the root logger from settings; debug forces DEBUG."""
    level = logging.DEBUG if debug else getattr(logging, settings.level)
    logging.basicConfig(level=level, format=settings.format, force=True)
