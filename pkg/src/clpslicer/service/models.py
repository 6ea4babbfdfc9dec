"""Request/response models for the trace service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    mode: str = Field("clp", pattern="^(clp|ccp)$")
    program: str
    goal: str = ""
    assertions: Optional[str] = None  # sidecar syntax
    seed: Optional[int] = None
    maxSteps: int = Field(10_000, gt=0)
    answers: int = Field(10, gt=0)
    solverNodes: int = Field(1_000_000, gt=0)
    subsetBudget: int = Field(20_000, gt=0)
    viaCcp: bool = False
    policy: str = Field("leftmost", pattern="^(leftmost|random|dfs)$")
    check: bool = False  # evaluate assertions and auto-slice on violation
    varClosure: bool = True


class RunResponse(BaseModel):
    traces: list[str]
    answers: list[str]
    verdicts: list[str]
    violation: Optional[dict] = None
    slicedTrace: Optional[str] = None


class SliceBody(BaseModel):
    cids: Optional[list[int]] = None
    pids: Optional[list[int]] = None
    markAll: bool = False
    variables: Optional[list[str]] = None
    unexpected: Optional[str] = None
    inconsistentWith: Optional[str] = None
    varClosure: bool = True
    subsetBudget: int = Field(20_000, gt=0)


class TraceList(BaseModel):
    traces: list[str]


class ErrorBody(BaseModel):
    detail: str


class HealthResponse(BaseModel):
    status: str
    version: int
    traceCount: int


AnyDoc = dict[str, Any]
