"""
Topology router for icardmaps.
Ranks, interval membership and neighborhood bases of Icard topologies.
"""
from typing import Any, Dict

from fastapi import APIRouter

from icardmaps.models.schemas import ConvergeRequest, IntervalRequest, NbhdMemberRequest, RankRequest, ShrinkRequest
from icardmaps.services import commands


router = APIRouter(prefix="/api/topology", tags=["topology"])


@router.post("/rank")
async def rank(request: RankRequest) -> Dict[str, Any]:
    return commands.topology_rank(request.lam, request.xi)


@router.post("/interval")
async def interval_membership(request: IntervalRequest) -> Dict[str, Any]:
    return commands.topology_member(request.xi, request.interval)


@router.post("/nbhd-member")
async def nbhd_membership(request: NbhdMemberRequest) -> Dict[str, Any]:
    return commands.topology_nbhd_member(request.center, commands.parse_simple_fn(request.r), request.xi)


@router.post("/shrink")
async def shrink(request: ShrinkRequest) -> Dict[str, Any]:
    """Single interval inside B_r around e^lambda(Theta)."""
    return commands.topology_shrink(request.lam, request.theta, commands.parse_simple_fn(request.r))


@router.post("/converging")
async def converging(request: ConvergeRequest) -> Dict[str, Any]:
    return commands.topology_converge(request.lam, request.theta, request.count)
