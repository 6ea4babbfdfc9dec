"""FastAPI service wrapping the workbench: run programs, fetch traces,
request slices.  The explorer UI is served statically when its build
directory exists."""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..engine import EngineError
from ..parser import ParseError
from ..session import (
    SessionConfig,
    SliceRequest,
    check_session,
    run_session,
    slice_document,
)
from ..slicer import MarkingError
from ..store import BudgetExceededError
from ..syntax import print_assertion
from ..tracedoc import SCHEMA_VERSION, TraceDir
from .models import (
    AnyDoc,
    HealthResponse,
    RunRequest,
    RunResponse,
    SliceBody,
    TraceList,
)


def create_app(trace_dir: Optional[str] = None, frontend: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="clpslicer trace service", version="0.1.0")
    traces = TraceDir(trace_dir)
    # runs are queued so seeded executions stay reproducible
    run_lock = threading.Lock()

    @app.exception_handler(ParseError)
    async def _parse_error(_, exc: ParseError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(MarkingError)
    async def _marking_error(_, exc: MarkingError):
        return JSONResponse(
            status_code=422,
            content={
                "detail": str(exc),
                "unknownCids": exc.unknown_cids,
                "unknownPids": exc.unknown_pids,
            },
        )

    @app.exception_handler(EngineError)
    async def _engine_error(_, exc: EngineError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(BudgetExceededError)
    async def _budget_error(_, exc: BudgetExceededError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok", version=SCHEMA_VERSION, traceCount=len(traces.ids())
        )

    @app.get("/traces", response_model=TraceList)
    def list_traces() -> TraceList:
        return TraceList(traces=traces.ids())

    @app.get("/traces/{ident}")
    def get_trace(ident: str) -> AnyDoc:
        try:
            return traces.load(ident)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown trace {ident}")

    @app.post("/traces/{ident}/slice")
    def slice_trace_endpoint(ident: str, body: SliceBody) -> AnyDoc:
        try:
            doc = traces.load(ident)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown trace {ident}")
        request = SliceRequest(
            cids=body.cids,
            pids=body.pids,
            mark_all=body.markAll,
            variables=body.variables,
            unexpected=body.unexpected,
            inconsistent_with=body.inconsistentWith,
            var_closure=body.varClosure,
            subset_budget=body.subsetBudget,
        )
        sliced_doc, _ = slice_document(doc, request)
        traces.save(sliced_doc)
        return sliced_doc

    @app.post("/run", response_model=RunResponse)
    def run_endpoint(body: RunRequest) -> RunResponse:
        config = SessionConfig(
            mode=body.mode,
            program_text=body.program,
            goal=body.goal,
            assert_text=body.assertions,
            seed=body.seed,
            max_steps=body.maxSteps,
            answers=body.answers,
            solver_nodes=body.solverNodes,
            subset_budget=body.subsetBudget,
            via_ccp=body.viaCcp,
            policy=body.policy,
            var_closure=body.varClosure,
            trace_dir=str(traces.path),
        )
        with run_lock:
            if body.check:
                checked = check_session(config)
                result = checked.run
                violation = None
                if checked.violated:
                    v = checked.violation_trace.violation
                    violation = {
                        "index": v.index,
                        "kind": v.kind,
                        "assertion": print_assertion(v.formula),
                        "markingCids": sorted(checked.marking.cids),
                        "markingPids": sorted(checked.marking.pids),
                    }
                return RunResponse(
                    traces=result.ids,
                    answers=result.answers,
                    verdicts=result.verdicts,
                    violation=violation,
                    slicedTrace=checked.sliced_id,
                )
            result = run_session(config)
            return RunResponse(
                traces=result.ids, answers=result.answers, verdicts=result.verdicts
            )

    dist = Path(frontend) if frontend else Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if dist.is_dir():
        app.mount("/", StaticFiles(directory=str(dist), html=True), name="ui")

    return app
