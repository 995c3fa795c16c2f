"""
Pipeline configuration for the annotate workflow

Defaults come from config.py (and therefore from .env); a JSON config file
overrides them and command-line flags override both.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

import config
from annotation.weak_annotator import FnPolicy
from localization.motion_localizer import LocalizerConfig


class IngestSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    timestamp_source: str = config.TIMESTAMP_SOURCE
    timestamp_regex: str = config.TIMESTAMP_REGEX
    timestamp_format: Optional[str] = config.TIMESTAMP_FORMAT
    gap_seconds: float = Field(default=config.GAP_SECONDS, ge=0.0)
    max_burst: int = Field(default=config.MAX_BURST, ge=1)

    @field_validator("timestamp_source")
    @classmethod
    def _source(cls, value):
        if value not in ("filename", "mtime"):
            raise ValueError(f"timestamp_source must be filename or mtime, got '{value}'")
        return value


class SplitSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    test_cameras: List[str] = Field(default_factory=lambda: list(config.TEST_CAMERAS))
    val_fraction: float = Field(default=config.VAL_FRACTION, ge=0.0, lt=1.0)
    seed: int = Field(default=config.SEED, ge=0)


class PipelineConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    localizer: LocalizerConfig = Field(default_factory=LocalizerConfig)
    ingest: IngestSettings = Field(default_factory=IngestSettings)
    split: SplitSettings = Field(default_factory=SplitSettings)
    fn_policy: FnPolicy = FnPolicy(config.FN_POLICY)
    output_dir: Path = Path(config.OUTPUT_DIR)
    log_dir: Path = Path(config.LOG_DIR)
    debug_dump: Optional[Path] = None
    workers: int = Field(default=config.WORKERS, ge=1)

    def dumps(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"

    @classmethod
    def resolve(cls, config_file=None, **overrides) -> "PipelineConfig":
        """Defaults <- JSON config file <- non-None keyword overrides.

        Both layers may use nested sections ({"localizer": {...}}) or flat
        keys (threshold_t, gap_seconds, seed, ...), which are routed to the
        section that declares them.
        """
        merged: Dict[str, Any] = {}
        if config_file is not None:
            path = Path(config_file)
            if not path.exists():
                raise FileNotFoundError(f"Config file not found: {path}")
            with open(path, "r", encoding="utf-8") as f:
                layer = json.load(f)
            if not isinstance(layer, dict):
                raise ValueError(f"{path}: config must be a JSON object")
            _merge(merged, layer)
        _merge(merged, {key: value for key, value in overrides.items() if value is not None})
        return cls.model_validate(merged)


SECTIONS = {
    "localizer": LocalizerConfig,
    "ingest": IngestSettings,
    "split": SplitSettings,
}


def _merge(target: Dict[str, Any], layer: Dict[str, Any]):
    for key, value in layer.items():
        if key in SECTIONS:
            if not isinstance(value, dict):
                raise ValueError(f"config section '{key}' must be an object")
            target.setdefault(key, {}).update(value)
            continue
        section = next((name for name, model in SECTIONS.items() if key in model.model_fields), None)
        if section is not None:
            target.setdefault(section, {})[key] = value
        elif key in PipelineConfig.model_fields:
            target[key] = value
        else:
            raise ValueError(f"unknown config key '{key}'")
