"""
Ordinals router for icardmaps.
Calculator endpoints over ordinal terms in hyperexponential normal form.
"""
from typing import Any, Dict

from fastapi import APIRouter

from icardmaps.models.schemas import (
    CompareResponse,
    FundSeqRequest,
    HyperRequest,
    OrdinalPairRequest,
    OrdinalRequest,
    OrdinalValueResponse,
    SubtractRequest,
)
from icardmaps.services import commands


router = APIRouter(prefix="/api/ordinals", tags=["ordinals"])


@router.post("/eval")
async def eval_ordinal(request: OrdinalRequest) -> Dict[str, Any]:
    """Normalize an expression and report its predicates."""
    return commands.ord_eval(request.x)


@router.post("/predicates")
async def ordinal_predicates(request: OrdinalRequest) -> Dict[str, Any]:
    return commands.ord_eval(request.x)["predicates"]


@router.post("/cmp", response_model=CompareResponse)
async def compare_ordinals(request: OrdinalPairRequest) -> CompareResponse:
    return CompareResponse(**commands.ord_cmp(request.x, request.y))


@router.post("/add", response_model=OrdinalValueResponse)
async def add_ordinals(request: OrdinalPairRequest) -> OrdinalValueResponse:
    return OrdinalValueResponse(**commands.ord_add(request.x, request.y))


@router.post("/subtract", response_model=OrdinalValueResponse)
async def subtract_ordinals(request: SubtractRequest) -> OrdinalValueResponse:
    return OrdinalValueResponse(**commands.ord_sub(request.a, request.b))


@router.post("/log", response_model=OrdinalValueResponse)
async def hyperlog(request: HyperRequest) -> OrdinalValueResponse:
    return OrdinalValueResponse(**commands.ord_log(request.degree, request.x))


@router.post("/exp", response_model=OrdinalValueResponse)
async def hyperexp(request: HyperRequest) -> OrdinalValueResponse:
    return OrdinalValueResponse(**commands.ord_exp(request.degree, request.x))


@router.post("/fundseq")
async def fundamental_sequence(request: FundSeqRequest) -> Dict[str, Any]:
    return commands.ord_fundseq(request.x, request.count)


@router.post("/decompose")
async def decompose(request: OrdinalRequest) -> Dict[str, Any]:
    """x = e^degree(mantissa) with mantissa 1 or decomposable."""
    return commands.ord_decompose(request.x)
