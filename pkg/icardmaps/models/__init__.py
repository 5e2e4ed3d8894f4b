"""
icardmaps Models

Pydantic models for API request/response schemas.
"""
from icardmaps.models.schemas import *
