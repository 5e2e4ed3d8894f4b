"""
GL router for icardmaps.
Provability, countermodels and consistency of formula sets.
"""
from typing import Any, Dict

from fastapi import APIRouter

from icardmaps.models.schemas import CharacteristicRequest, CheckRequest, FormulaRequest, FormulaSetRequest
from icardmaps.services import commands, config_manager


router = APIRouter(prefix="/api/gl", tags=["gl"])


@router.post("/prove")
async def prove(request: FormulaRequest) -> Dict[str, Any]:
    """Theorem, or non-theorem with a countermodel refuting the formula at its root."""
    config = config_manager.get_engine_config(budget=request.budget)
    return commands.gl_prove(request.formula, config.budget)


@router.post("/model")
async def model(request: FormulaSetRequest) -> Dict[str, Any]:
    config = config_manager.get_engine_config(budget=request.budget)
    return commands.gl_model(request.formulas, config.budget)


@router.post("/check")
async def check(request: CheckRequest) -> Dict[str, Any]:
    return commands.gl_check(request.model, request.node, request.formula)


@router.post("/consistent")
async def consistent(request: FormulaSetRequest) -> Dict[str, Any]:
    config = config_manager.get_engine_config(budget=request.budget)
    return commands.gl_consistent(request.formulas, config.budget)


@router.post("/characteristic")
async def characteristic(request: CharacteristicRequest) -> Dict[str, Any]:
    config = config_manager.get_engine_config(budget=request.budget)
    return commands.gl_characteristic(request.formulas, request.cap, config.budget)
