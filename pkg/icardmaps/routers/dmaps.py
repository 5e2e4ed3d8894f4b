"""
D-maps router for icardmaps.
Evaluation, preimage witnesses, block tables and certificate selftests.
"""
from typing import Any, Dict

from fastapi import APIRouter

from icardmaps.models.schemas import (
    DMapBlocksRequest,
    DMapEvalRequest,
    DMapOpennessRequest,
    DMapWitnessRequest,
    SelftestRequest,
)
from icardmaps.services import commands, config_manager


router = APIRouter(prefix="/api/dmaps", tags=["dmaps"])


@router.post("/eval")
async def evaluate(request: DMapEvalRequest) -> Dict[str, Any]:
    config = config_manager.get_engine_config()
    b = commands.resolve_bouquet(request.bouquet, request.sample)
    return commands.dmap_eval(request.lam, b, request.xi, request.trace, config.search_budget)


@router.post("/witness")
async def witness(request: DMapWitnessRequest) -> Dict[str, Any]:
    config = config_manager.get_engine_config()
    b = commands.resolve_bouquet(request.bouquet, request.sample)
    return commands.dmap_witness(request.lam, b, request.path, config.search_budget)


@router.post("/blocks")
async def blocks(request: DMapBlocksRequest) -> Dict[str, Any]:
    config = config_manager.get_engine_config()
    b = commands.resolve_bouquet(request.bouquet, request.sample)
    return commands.dmap_blocks(request.lam, b, request.count, config.search_budget)


@router.post("/openness")
async def openness(request: DMapOpennessRequest) -> Dict[str, Any]:
    config = config_manager.get_engine_config(seed=request.seed)
    b = commands.resolve_bouquet(request.bouquet, request.sample)
    return commands.dmap_openness(request.lam, b, request.xi, request.samples, config.seed)


@router.post("/selftest")
async def selftest(request: SelftestRequest) -> Dict[str, Any]:
    """
    Certificate checks over the sample bouquets.

    With save set, the report and its CSV summary are written under the
    configured reports directory.
    """
    config = config_manager.get_engine_config(samples=request.samples, seed=request.seed)
    return commands.dmap_selftest(
        request.lambdas,
        samples=config.samples,
        seed=config.seed,
        search_budget=config.search_budget,
        save=request.save,
        reports_dir=config.reports_dir,
    )
