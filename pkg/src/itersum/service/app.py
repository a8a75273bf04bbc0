"""HTTP service: serves blinded items to assessors and collects annotations.

The service reads items and the annotation log only; the blinding keys
directory is never opened by any handler, so no endpoint can leak an
origin. Every /api route requires the caller's per-assessor bearer token.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..human_eval import AnnotationRecord, ValidationError
from .store import (
    DataStore,
    Duplicate,
    TaskNotGenerated,
    UnknownAssessor,
    UnknownItemId,
    UnknownTask,
)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "message": message})


def _bearer_token(request: Request) -> str | None:
    header = request.headers.get("authorization", "")
    if not header.lower().startswith("bearer "):
        return None
    return header[7:].strip()


def create_app(
    data_dir: str | Path, *, ui_origin: str | None = None, clock=None
) -> FastAPI:
    store = DataStore(data_dir)
    app = FastAPI(title="itersum annotation service", docs_url=None, redoc_url=None)

    if ui_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[ui_origin],
            allow_methods=["GET", "POST"],
            allow_headers=["Authorization", "Content-Type"],
        )

    def authenticate(request: Request, assessor_id: str) -> JSONResponse | None:
        token = _bearer_token(request)
        if token is None:
            return _error(401, "MissingToken", "Authorization: Bearer token required")
        try:
            expected = store.require_assessor(assessor_id)
        except UnknownAssessor as exc:
            return _error(404, "UnknownAssessor", str(exc))
        if token != expected:
            return _error(401, "BadToken", "token does not match assessor")
        return None

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/api/tasks/{task}/pending")
    def pending(task: str, assessor: str, request: Request):
        denied = authenticate(request, assessor)
        if denied:
            return denied
        try:
            items = store.pending_for(assessor, task)
        except UnknownTask as exc:
            return _error(404, "UnknownTask", str(exc))
        except TaskNotGenerated as exc:
            return _error(404, "TaskNotGenerated", str(exc))
        return [item.to_dict() for item in items]

    @app.post("/api/annotations")
    async def submit(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "BadRequest", "body must be JSON")
        for name in ("assessor_id", "item_id", "selection"):
            if name not in body:
                return _error(400, "BadRequest", f"missing field {name!r}")
        denied = authenticate(request, str(body["assessor_id"]))
        if denied:
            return denied
        record = AnnotationRecord(
            assessor_id=body["assessor_id"],
            item_id=body["item_id"],
            selection=body["selection"],
            justification=body.get("justification"),
        )
        try:
            kwargs = {"clock": clock} if clock else {}
            stored = store.append_annotation(record, **kwargs)
        except UnknownItemId as exc:
            return _error(404, "UnknownItem", str(exc))
        except ValidationError as exc:
            return _error(400, "ValidationError", str(exc))
        except Duplicate as exc:
            return JSONResponse(
                status_code=409,
                content={"accepted": False, "reason": str(exc)},
            )
        return {"accepted": True, "reason": None, "timestamp": stored.timestamp}

    @app.get("/api/progress")
    def progress(assessor: str, request: Request):
        denied = authenticate(request, assessor)
        if denied:
            return denied
        return store.progress(assessor)

    return app
