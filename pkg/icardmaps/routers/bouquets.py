"""
Bouquets router for icardmaps.
Ranks, model checking and inspection of omega-bouquets.
"""
from typing import Any, Dict

from fastapi import APIRouter

from icardmaps.models.schemas import BouquetRequest, DaughtersRequest, MaterializeRequest, McRequest
from icardmaps.services import commands, config_manager
from icardmaps.services.synthetic_data import sample_bouquets


router = APIRouter(prefix="/api/bouquets", tags=["bouquets"])


@router.get("/samples")
async def list_samples() -> Dict[str, Any]:
    """Names and ranks of the built-in sample bouquets."""
    return {"samples": {name: str(b.rank) for name, b in sample_bouquets().items()}}


@router.post("/rank")
async def rank(request: BouquetRequest) -> Dict[str, Any]:
    return commands.bouquet_rank(commands.resolve_bouquet(request.bouquet, request.sample))


@router.post("/mc")
async def model_check(request: McRequest) -> Dict[str, Any]:
    config = config_manager.get_engine_config(budget=request.budget, mc_prefix=request.prefix)
    b = commands.resolve_bouquet(request.bouquet, request.sample)
    return commands.bouquet_mc(b, request.path, request.formula, config.mc_prefix, config.budget)


@router.post("/materialize")
async def materialize(request: MaterializeRequest) -> Dict[str, Any]:
    b = commands.resolve_bouquet(request.bouquet, request.sample)
    return commands.bouquet_materialize(b, request.depth, request.prefix)


@router.post("/daughters")
async def daughters(request: DaughtersRequest) -> Dict[str, Any]:
    b = commands.resolve_bouquet(request.bouquet, request.sample)
    return commands.bouquet_daughters(b, request.mode, request.count, request.dominating)
