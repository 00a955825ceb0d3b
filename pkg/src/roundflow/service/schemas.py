"""Request/response models for the verification service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str


class FranksRequest(BaseModel):
    betti: list[int] = Field(min_length=5, max_length=5)
    handles: list[Optional[int]] = Field(min_length=4, max_length=4)
    source_note: str = ""


class ViolationOut(BaseModel):
    rule: str
    text: str


class FranksResponse(BaseModel):
    passed: bool
    violations: list[ViolationOut]
    report: str


class OrderRequest(BaseModel):
    flow_text: str


class OrderResponse(BaseModel):
    order: Optional[list[str]] = None
    cycle: Optional[list[str]] = None
    violations: list[str] = []
    report: str = ""


class H1Request(BaseModel):
    expr: str


class GroupOut(BaseModel):
    known: bool
    free_rank: Optional[int] = None
    torsion: Optional[list[int]] = None
    text: str


class H1Response(BaseModel):
    normalized: str
    components: list[GroupOut]
    report: str


class SurgerRequest(BaseModel):
    expr: str
    component: int = 0
    case: Literal["dividing", "nondividing"]
    p: int
    q: int
    a1: Optional[str] = None  # dividing: summand kept with the lens side


class SurgerResponse(BaseModel):
    result: str
    solid_torus_note: str
    report: str


class ComprRequest(BaseModel):
    k0: int
    k1: int
    pq_bound: int


class ComprResponse(BaseModel):
    success: bool
    counterexamples: list[str]
    report: str
    trace: str


class VerifyRequest(BaseModel):
    flow_text: str
    pq_bound: int = 3


class VerifyResponse(BaseModel):
    verdict: str
    obstruction: str = ""
    ok: bool
    report: str
    trace: str


class SweepRequest(BaseModel):
    k0_max: int
    k1_extra: int
    pq_bound: int


class SweepRowOut(BaseModel):
    k0: int
    k1: int
    placements: int
    classified: int
    obstructed: int
    status: str


class SweepResponse(BaseModel):
    ok: bool
    rows: list[SweepRowOut]
    report: str
    trace: str
