"""
Reports router for icardmaps.
Lists and serves saved selftest reports.
"""
from typing import Any, Dict

from fastapi import APIRouter, HTTPException

from icardmaps.models.schemas import ReportListResponse
from icardmaps.services import commands, config_manager, file_ops


router = APIRouter(prefix="/api/reports", tags=["reports"])


@router.get("", response_model=ReportListResponse)
async def list_reports() -> ReportListResponse:
    return ReportListResponse(**commands.list_reports(config_manager.reports_dir()))


@router.get("/{filename}")
async def get_report(filename: str) -> Dict[str, Any]:
    reports_dir = config_manager.reports_dir()
    if not file_ops.file_exists(f"{reports_dir}/{filename}"):
        raise HTTPException(status_code=404, detail=f"Report not found: {filename}")
    return commands.show_report(filename, reports_dir)
