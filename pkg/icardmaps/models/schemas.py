"""
Pydantic models for icardmaps API request/response schemas.
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


# ============ Config Schemas ============

class EngineConfigUpdate(BaseModel):
    """Partial engine configuration sent to POST /api/config."""
    model_config = ConfigDict(extra="forbid")

    budget: Optional[int] = None
    seed: Optional[int] = None
    default_lambda: Optional[str] = None
    samples: Optional[int] = None
    prefix: Optional[int] = None
    search_budget: Optional[int] = None
    mc_prefix: Optional[int] = None
    reports_dir: Optional[str] = None


class ConfigResponse(BaseModel):
    """Response for GET /api/config."""
    config: Dict[str, Any]
    last_modified: str


class ConfigSaveResponse(BaseModel):
    """Response for POST /api/config."""
    status: str
    version_file: str
    active_file: str


# ============ Ordinal Schemas ============

class OrdinalRequest(BaseModel):
    x: str = Field(..., description="Ordinal expression, e.g. e[w](w^(2)*3)+1")


class OrdinalPairRequest(BaseModel):
    x: str
    y: str


class HyperRequest(BaseModel):
    """Degree and argument for hyperexponentials and hyperlogarithms."""
    degree: str
    x: str


class FundSeqRequest(BaseModel):
    x: str
    count: int = Field(5, ge=1, le=1000)


class SubtractRequest(BaseModel):
    """-a+b for a <= b."""
    a: str
    b: str


class OrdinalValueResponse(BaseModel):
    value: str


class CompareResponse(BaseModel):
    x: str
    y: str
    result: str


# ============ Topology Schemas ============

class RankRequest(BaseModel):
    lam: str = Field(..., alias="lambda")
    xi: str

    model_config = ConfigDict(populate_by_name=True)


class IntervalRequest(BaseModel):
    xi: str
    interval: str = Field(..., description='"(A, B]_L" or "[0, B]_L"')


class NbhdMemberRequest(BaseModel):
    center: str
    r: Dict[str, str] = Field(default_factory=dict, description="level -> threshold")
    xi: str


class ShrinkRequest(BaseModel):
    lam: str = Field(..., alias="lambda")
    theta: str
    r: Dict[str, str] = Field(default_factory=dict)

    model_config = ConfigDict(populate_by_name=True)


class ConvergeRequest(BaseModel):
    lam: str = Field(..., alias="lambda")
    theta: str
    count: int = Field(5, ge=1, le=1000)

    model_config = ConfigDict(populate_by_name=True)


# ============ GL Schemas ============

class FormulaRequest(BaseModel):
    formula: str
    budget: Optional[int] = Field(None, ge=1)


class FormulaSetRequest(BaseModel):
    formulas: List[str]
    budget: Optional[int] = Field(None, ge=1)


class CheckRequest(BaseModel):
    model: Dict[str, Any] = Field(..., description="TreeModel JSON {nodes, root}")
    node: Optional[int] = None
    formula: str


class CharacteristicRequest(BaseModel):
    formulas: List[str]
    cap: int = Field(8, ge=0, le=64)
    budget: Optional[int] = Field(None, ge=1)


# ============ Bouquet Schemas ============

class BouquetRequest(BaseModel):
    """A bouquet given inline as JSON or by sample name."""
    bouquet: Optional[Dict[str, Any]] = None
    sample: Optional[str] = None


class McRequest(BouquetRequest):
    path: str = ""
    formula: str
    prefix: Optional[int] = Field(None, ge=1)
    budget: Optional[int] = Field(None, ge=1)


class MaterializeRequest(BouquetRequest):
    depth: int = Field(2, ge=0, le=8)
    prefix: int = Field(4, ge=1, le=64)


class DaughtersRequest(BouquetRequest):
    mode: str = "each_once"
    count: int = Field(8, ge=1, le=4096)
    dominating: bool = False


# ============ D-map Schemas ============

class DMapRequest(BouquetRequest):
    lam: str = Field("1", alias="lambda")

    model_config = ConfigDict(populate_by_name=True)


class DMapEvalRequest(DMapRequest):
    xi: str
    trace: bool = False


class DMapWitnessRequest(DMapRequest):
    path: str = ""


class DMapBlocksRequest(DMapRequest):
    count: int = Field(6, ge=1, le=256)


class DMapOpennessRequest(DMapRequest):
    xi: str
    samples: int = Field(8, ge=1, le=256)
    seed: Optional[int] = None


class SelftestRequest(BaseModel):
    lambdas: List[str] = Field(default_factory=list, description="Empty means the sample lambdas")
    samples: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = None
    save: bool = False


# ============ Satisfy Schemas ============

class SatisfyRequest(BaseModel):
    """A finite formula list, or a stream given by name or psi/phi templates."""
    formulas: List[str] = Field(default_factory=list)
    lam: Optional[str] = Field(None, alias="lambda")
    stream: Optional[Dict[str, Any]] = None
    k: Optional[int] = Field(None, ge=1)
    samples: int = Field(20, ge=1)
    seed: Optional[int] = None
    ambient: Optional[str] = None

    model_config = ConfigDict(populate_by_name=True)


# ============ Report Schemas ============

class ReportSummary(BaseModel):
    filename: str
    modified: Optional[str] = None


class ReportListResponse(BaseModel):
    reports: List[ReportSummary]
