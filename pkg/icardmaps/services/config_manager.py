"""
Configuration manager service for icardmaps.
Handles the active engine configuration, validation and versioning.
"""
import logging
from datetime import datetime
from typing import Any, Dict, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator

from icardmaps.services import file_ops
from icardmaps.services.errors import InputError, ParseError
from icardmaps.services.ordinal_parser import parse_ordinal

logger = logging.getLogger(__name__)

ACTIVE_CONFIG_PATH = "config_files/active_engine_config.json"


class EngineConfig(BaseModel):
    """Validated engine settings shared by the CLI and the API."""

    budget: int = Field(20000, ge=1)
    seed: int = 0
    default_lambda: str = "1"
    samples: int = Field(60, ge=1)
    prefix: int = Field(5, ge=1)
    search_budget: int = Field(4096, ge=1)
    mc_prefix: int = Field(8, ge=1)
    reports_dir: str = "reports"

    @field_validator("default_lambda")
    @classmethod
    def lambda_is_nonzero_ordinal(cls, value: str) -> str:
        try:
            parsed = parse_ordinal(value)
        except ParseError as exc:
            raise ValueError(str(exc)) from exc
        if not parsed:
            raise ValueError("default_lambda must be nonzero")
        return value


def get_default_config() -> Dict[str, Any]:
    """EngineConfig defaults as a plain dict."""
    return EngineConfig().model_dump()


def get_active_config() -> Dict[str, Any]:
    """The stored engine configuration; the defaults are written on first use."""
    if not file_ops.file_exists(ACTIVE_CONFIG_PATH):
        defaults = get_default_config()
        file_ops.write_json(ACTIVE_CONFIG_PATH, defaults)
        return defaults
    stored = file_ops.read_json(ACTIVE_CONFIG_PATH)
    # keys added after the file was written fall back to defaults
    return {**get_default_config(), **stored}


def get_engine_config(**overrides: Any) -> EngineConfig:
    """The active configuration with non-None overrides applied, validated."""
    merged = get_active_config()
    merged.update({key: value for key, value in overrides.items() if value is not None})
    return validate_config(merged)


def validate_config(config: Dict[str, Any]) -> EngineConfig:
    try:
        return EngineConfig(**config)
    except ValidationError as exc:
        raise InputError(f"invalid engine configuration: {exc.errors()[0]['msg']}") from exc


def get_active_config_modified_time() -> str:
    return file_ops.get_file_modified_time(ACTIVE_CONFIG_PATH) or datetime.now().isoformat()


def save_config(config: Dict[str, Any]) -> Tuple[str, str]:
    """
    Merge a partial update into the active config and persist it.

    None values are ignored. The merged result is validated before anything
    is written; a versioned copy goes to config_files/ next to the active file.

    Returns:
        (versioned filename, active filename)
    """
    merged = get_active_config()
    merged.update({key: value for key, value in config.items() if value is not None})
    final_config = validate_config(merged).model_dump()

    file_ops.ensure_base_directories()
    versioned_filename = file_ops.create_versioned_filename("engine_config", f"seed{final_config['seed']}")
    file_ops.write_json(f"{file_ops.CONFIG_DIR}/{versioned_filename}", final_config)
    file_ops.write_json(ACTIVE_CONFIG_PATH, final_config)
    logger.info("saved engine configuration as %s", versioned_filename)
    return versioned_filename, "active_engine_config.json"


def reports_dir(config: Optional[EngineConfig] = None) -> str:
    return (config or get_engine_config()).reports_dir
