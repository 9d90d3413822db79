"""HTTP facade over the pipeline.

JSON in, JSON out, versioned under /v1. Every error body is a single
ApiError object {code, message, stage}; stack traces never leak.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .corpus import SortKey, sort_papers
from .errors import (
    BudgetExceeded,
    CassetteMiss,
    CorruptSession,
    DecodeError,
    DuplicateDirective,
    EmptyAbstract,
    EmptyQuery,
    InvalidSeed,
    LitPipeError,
    LlmTimeout,
    NoCandidatesFound,
    NotFound,
    PlanContextMismatch,
    PlanLineOutOfRange,
    PlanSyntaxError,
    ProviderError,
    RateLimited,
    StageError,
    UpstreamError,
)
from .pipeline import Pipeline, PipelineSession
from .plan import parse_plan
from .query import QuerySpec

logger = logging.getLogger(__name__)

_STATUS_BY_ERROR = (
    (PlanSyntaxError, 422),
    (PlanLineOutOfRange, 422),
    (DuplicateDirective, 422),
    (PlanContextMismatch, 409),
    (NotFound, 404),
    (RateLimited, 429),
    (EmptyQuery, 400),
    (EmptyAbstract, 400),
    (InvalidSeed, 400),
    (BudgetExceeded, 400),
    (NoCandidatesFound, 404),
    (CorruptSession, 500),
    (UpstreamError, 502),
    (DecodeError, 502),
    (ProviderError, 502),
    (LlmTimeout, 504),
    (CassetteMiss, 502),
)


def _error_response(exc: Exception, stage: str | None = None) -> JSONResponse:
    status = 500
    cause = exc.cause if isinstance(exc, StageError) else exc
    for klass, mapped in _STATUS_BY_ERROR:
        if isinstance(cause, klass):
            status = mapped
            break
    else:
        if isinstance(cause, ValueError):
            status = 400
    body = {
        "code": type(cause).__name__,
        "message": str(cause),
        "stage": getattr(exc, "stage", stage),
    }
    if isinstance(cause, PlanSyntaxError):
        body["position"] = cause.position
    headers = {}
    if isinstance(cause, RateLimited) and cause.retry_after is not None:
        headers["Retry-After"] = str(int(cause.retry_after))
    return JSONResponse(status_code=status, content=body, headers=headers)


class SessionRequest(BaseModel):
    abstract: str = ""
    keywords: list[str] = Field(default_factory=list)
    seed_ids: list[str] = Field(default_factory=list)
    plan: str | None = None
    config: dict = Field(default_factory=dict)


class DraftRequest(BaseModel):
    plan: str | None = None
    sort: str | None = None


def _session_summary(session: PipelineSession) -> dict:
    return {
        "session_id": session.session_id,
        "created_at": session.created_at,
        "query": session.search_query,
        "candidates": [p.to_dict() for p in session.candidates],
        "ranked": session.ranked.to_dict() if session.ranked else None,
        "drafts": [d.to_dict() for d in session.drafts],
        "stage_errors": session.stage_errors,
        "warnings": session.warnings,
    }


def _parse_sort(value: str) -> SortKey:
    try:
        return SortKey(value)
    except ValueError:
        raise ValueError(f"sort must be one of relevance|citations|year, got {value!r}")


def create_app(
    pipeline: Pipeline, ui_origin: str = "*", static_dir: str | None = None
) -> FastAPI:
    app = FastAPI(title="litpipe", docs_url="/v1/docs", openapi_url="/v1/openapi.json")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[ui_origin] if ui_origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(LitPipeError)
    async def _handle_litpipe_error(request: Request, exc: LitPipeError):
        logger.info("request failed: %s", exc)
        return _error_response(exc)

    @app.exception_handler(ValueError)
    async def _handle_value_error(request: Request, exc: ValueError):
        return _error_response(exc)

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: SessionRequest) -> dict:
        spec = QuerySpec(
            abstract_text=body.abstract,
            user_keywords=body.keywords,
            seed_ids=body.seed_ids,
        )
        spec.validate()
        config = pipeline.config.with_overrides(body.config) if body.config else None
        plan = parse_plan(body.plan) if body.plan else None
        session = pipeline.run(spec, config=config, plan=plan)
        return _session_summary(session)

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        session = pipeline.store.load(session_id)
        return session.to_dict()

    @app.get("/v1/sessions/{session_id}/papers")
    def get_papers(session_id: str, sort: str = "relevance") -> dict:
        key = _parse_sort(sort)
        session = pipeline.store.load(session_id)
        position = {p.canonical_id: i for i, p in enumerate(session.candidates, start=1)}
        if key is SortKey.RELEVANCE:
            view = list(session.candidates)
        else:
            view = sort_papers(session.candidates, key)
        return {
            "session_id": session.session_id,
            "sort": key.value,
            "papers": [
                {"index": position[p.canonical_id], **p.to_dict()} for p in view
            ],
        }

    @app.post("/v1/sessions/{session_id}/drafts")
    def create_draft(session_id: str, body: DraftRequest) -> dict:
        plan = parse_plan(body.plan) if body.plan else None
        sort = _parse_sort(body.sort) if body.sort else None
        session = pipeline.regenerate(session_id, plan=plan, sort=sort)
        # A sort-only call reorders the view without generating anything.
        appended = plan is not None or sort is None
        draft = session.drafts[-1].to_dict() if appended and session.drafts else None
        return {
            "session_id": session.session_id,
            "draft": draft,
            "view_order": session.view_order,
            "view_sort": session.view_sort,
        }

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
