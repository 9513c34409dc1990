"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str


class RegistryResponse(BaseModel):
    kbs: list[str]
    apis: list[str]


class IdentifiersRequest(BaseModel):
    kb: str
    settings: Optional[dict] = None


class IdentifierRelation(BaseModel):
    relation: str
    inverse_functionality: float


class IdentifiersResponse(BaseModel):
    kb: str
    theta_id: float
    identifier_relations: list[IdentifierRelation]


class ProbeRequest(BaseModel):
    kb: str
    api: str
    settings: Optional[dict] = None


class RelationProbeStatsModel(BaseModel):
    requests_sent: int
    valid_responses: int
    error_responses: int
    http_failures: int


class ProbeReportModel(BaseModel):
    valid_input_relations: list[str]
    error_signature: Optional[str] = None
    relations: dict[str, RelationProbeStatsModel]


class ProbeResponse(BaseModel):
    kb: str
    api: str
    probe: ProbeReportModel


class AlignRequest(BaseModel):
    kb: str
    api: str
    settings: Optional[dict] = None


class PathHop(BaseModel):
    predicate: str
    direction: Literal["forward", "inverse"]


class SupportModel(BaseModel):
    matches: int
    valid_responses: int


class AlignmentEntryModel(BaseModel):
    input_relation: str
    kb_path: list[PathHop]
    api_path: str
    kind: Literal["FPM", "BPM"]
    method: str
    confidence: float = Field(ge=0, le=1)
    support: SupportModel


class AlignResponse(BaseModel):
    kb: str
    api: str
    seed: int
    identifier_relations: list[IdentifierRelation]
    probe: ProbeReportModel
    alignment: list[AlignmentEntryModel]
