"""
Satisfy router for icardmaps.
End-to-end witnesses for finite formula sets and formula streams.
"""
from typing import Any, Dict

from fastapi import APIRouter

from icardmaps.models.schemas import SatisfyRequest
from icardmaps.services import commands, config_manager


router = APIRouter(prefix="/api/satisfy", tags=["satisfy"])


@router.post("")
async def satisfy(request: SatisfyRequest) -> Dict[str, Any]:
    """
    Witness point e^lambda(Theta) for a consistent set.

    lambda, k and the seed fall back to the active engine configuration.
    """
    config = config_manager.get_engine_config(default_lambda=request.lam, prefix=request.k, seed=request.seed)
    return commands.satisfy(
        request.formulas,
        lam=config.default_lambda,
        stream=request.stream,
        k=config.prefix,
        budget=config.budget,
        samples=request.samples,
        seed=config.seed,
        ambient=request.ambient,
    )
