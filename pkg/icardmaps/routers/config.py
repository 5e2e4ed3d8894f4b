"""
Config management router for icardmaps.
Handles GET/POST /api/config.
"""
import logging

from fastapi import APIRouter, HTTPException

from icardmaps.models.schemas import ConfigResponse, ConfigSaveResponse, EngineConfigUpdate
from icardmaps.services import config_manager
from icardmaps.services.errors import IcardError, http_status_for

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api/config", tags=["config"])


@router.get("", response_model=ConfigResponse)
async def get_config() -> ConfigResponse:
    """
    Get the current active engine configuration.
    Creates default config if it doesn't exist.
    """
    try:
        config = config_manager.get_active_config()
        last_modified = config_manager.get_active_config_modified_time()
        return ConfigResponse(config=config, last_modified=last_modified)
    except OSError as e:
        logger.error("failed to read config: %s", e)
        raise HTTPException(status_code=500, detail=f"Error reading config: {str(e)}")


@router.post("", response_model=ConfigSaveResponse)
async def save_config(config: EngineConfigUpdate) -> ConfigSaveResponse:
    """
    Save configuration with versioning.

    1. Merges the given keys into the active config
    2. Validates the result
    3. Saves versioned copy
    4. Updates active_engine_config.json
    """
    try:
        version_file, active_file = config_manager.save_config(config.model_dump(exclude_none=True))
        return ConfigSaveResponse(status="saved", version_file=version_file, active_file=active_file)
    except IcardError as e:
        raise HTTPException(status_code=http_status_for(e), detail=str(e))
    except OSError as e:
        logger.error("failed to save config: %s", e)
        raise HTTPException(status_code=500, detail=f"Error saving config: {str(e)}")
