"""HTTP service: projects, revision uploads, asynchronous analysis jobs,
report retrieval, and archive comparison.

Uploads return 202 immediately; a bounded worker pool runs the analysis
pipeline. Writes within one project are serialized; analysis of a
project's revisions runs in upload order so the tracker always compares
against the immediately preceding revision.
"""
from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor

from fastapi import Body, Depends, FastAPI, HTTPException, Request, Response, UploadFile

from .errors import (
    DecodeError,
    FormatError,
    NotReady,
    SizeError,
    StageError,
    UnknownProject,
    UnknownRevision,
    ValidationError,
    VizcriticError,
)
from .image_io import encode_png, load_chart_image
from .pipeline import AnalysisContext, run_pipeline
from .report import canonical_json, parse_report, serialize_report
from .store import FileStore, RevisionRecord
from .tracker import archive_pair

logger = logging.getLogger(__name__)

DEFAULT_WORKERS = 2


class ProjectService:
    def __init__(self, store: FileStore, ctx: AnalysisContext, workers: int = DEFAULT_WORKERS):
        self.store = store
        self.ctx = ctx
        self._pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="analysis")
        self._analysis_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        for record in self.store.scan_for_recovery():
            self._enqueue(record)

    def close(self):
        self._pool.shutdown(wait=True)

    def _analysis_lock(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._analysis_locks.setdefault(project_id, threading.Lock())

    # -- operations ---------------------------------------------------------

    def create_project(self, owner: str, name: str):
        return self.store.create_project(owner, name)

    def delete_project(self, project_id: str) -> None:
        # hold the analysis lock so an in-flight job finishes before the
        # project directory disappears under it
        with self._analysis_lock(project_id):
            self.store.delete_project(project_id)

    def upload_revision(self, project_id: str, image_bytes: bytes, declared_format: str) -> RevisionRecord:
        """Validate, persist under the next sequence number, and enqueue."""
        self.store.get_project(project_id)
        image = load_chart_image(image_bytes, declared_format)
        normalized = encode_png(image)
        with self.store.project_lock(project_id):
            record = self.store.create_revision(project_id, normalized)
        self._enqueue(record)
        return record

    def _enqueue(self, record: RevisionRecord) -> None:
        self._pool.submit(self._run_job, record.project_id, record.sequence)

    def _run_job(self, project_id: str, sequence: int) -> None:
        try:
            with self._analysis_lock(project_id):
                self.run_analysis(project_id, sequence)
        except VizcriticError as exc:
            logger.warning("analysis of %s/%s failed: %s", project_id, sequence, exc)
        except Exception:
            logger.exception("unexpected failure analyzing %s/%s", project_id, sequence)

    def run_analysis(self, project_id: str, sequence: int):
        record = self.store.get_revision(project_id, sequence)
        if record.status != "queued":
            return record
        record.status = "analyzing"
        record.started_at = self.ctx.clock()
        self.store.update_revision(record)

        prev_report = None
        if sequence > 1:
            try:
                prev_doc = self.store.load_report_document(project_id, sequence - 1)
                prev_report = parse_report(prev_doc)
            except (UnknownRevision, VizcriticError):
                prev_report = None

        image_bytes = self.store.read_image(project_id, sequence)

        def sink(name: str, data: bytes):
            self.store.write_artifact(project_id, sequence, name, data)

        try:
            report = run_pipeline(
                image_bytes,
                "png",
                self.ctx,
                revision_id=f"{project_id}.{sequence}",
                prev_report=prev_report,
                write_artifact=sink,
            )
        except StageError as exc:
            record.status = "failed"
            record.error = {"stage": exc.stage, "message": str(exc.cause)}
            record.finished_at = self.ctx.clock()
            self.store.update_revision(record)
            raise
        self.store.save_report_document(project_id, sequence, serialize_report(report))
        record.status = "complete"
        record.report_ref = "report.json"
        record.finished_at = self.ctx.clock()
        self.store.update_revision(record)
        return record

    def get_report_document(self, project_id: str, sequence: int) -> bytes:
        record = self.store.get_revision(project_id, sequence)
        if record.status != "complete":
            detail = ""
            if record.error:
                detail = f"stage {record.error['stage']}: {record.error['message']}"
            raise NotReady(record.status, detail)
        return self.store.load_report_document(project_id, sequence)

    def archive_documents(self, project_id: str, a: int, b: int) -> tuple[bytes, bytes]:
        project = self.store.get_project(project_id)

        def load(_project, seq):
            return self.get_report_document(project_id, seq)

        return archive_pair(project, a, b, load)


# --------------------------------------------------------------------------
# HTTP layer
# --------------------------------------------------------------------------


def _canonical_response(payload, status_code: int = 200) -> Response:
    return Response(content=canonical_json(payload), status_code=status_code, media_type="application/json")


def _error_response(kind: str, message: str, status_code: int) -> Response:
    return _canonical_response({"error": kind, "message": message}, status_code)


def create_app(service: ProjectService, tokens: dict[str, str] | None = None) -> FastAPI:
    """Build the API app. tokens maps bearer token -> user id; an empty
    mapping runs the service openly under a single default user."""
    app = FastAPI(title="vizcritic", docs_url=None, redoc_url=None)
    tokens = tokens or {}

    def current_user(request: Request) -> str:
        if not tokens:
            return "local"
        header = request.headers.get("Authorization", "")
        if header.startswith("Bearer "):
            token = header[len("Bearer ") :].strip()
            if token in tokens:
                return tokens[token]
        raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    @app.exception_handler(VizcriticError)
    async def handle_domain_error(request: Request, exc: VizcriticError):
        mapping = [
            (NotReady, 409),
            (UnknownProject, 404),
            (UnknownRevision, 404),
            ((SizeError, FormatError, DecodeError), 400),
            (ValidationError, 400),
        ]
        for kinds, code in mapping:
            if isinstance(exc, kinds):
                body = {"error": type(exc).__name__, "message": str(exc)}
                if isinstance(exc, NotReady):
                    body["status"] = exc.status
                return Response(content=canonical_json(body), status_code=code, media_type="application/json")
        return Response(
            content=canonical_json({"error": type(exc).__name__, "message": str(exc)}),
            status_code=500,
            media_type="application/json",
        )

    # endpoints are sync so FastAPI dispatches the blocking store and
    # image work to its worker threadpool instead of the event loop

    @app.post("/projects")
    def create_project(body: dict = Body(...), user: str = Depends(current_user)):
        project = service.create_project(user, str(body.get("name", "")))
        return _canonical_response(project.to_dict(), 201)

    @app.get("/projects")
    def list_projects(user: str = Depends(current_user)):
        return _canonical_response([p.to_dict() for p in service.store.list_projects(user)])

    @app.delete("/projects/{project_id}")
    def delete_project(project_id: str, user: str = Depends(current_user)):
        service.delete_project(project_id)
        return _canonical_response({"deleted": project_id})

    @app.post("/projects/{project_id}/revisions", status_code=202)
    def upload_revision(project_id: str, image: UploadFile, user: str = Depends(current_user)):
        data = image.file.read()
        name = image.filename or ""
        suffix = name.rsplit(".", 1)[-1].lower() if "." in name else ""
        if not suffix and image.content_type:
            suffix = image.content_type.rsplit("/", 1)[-1]
        record = service.upload_revision(project_id, data, suffix)
        return _canonical_response(record.to_dict(), 202)

    @app.get("/projects/{project_id}/revisions")
    def list_revisions(project_id: str, user: str = Depends(current_user)):
        records = service.store.list_revisions(project_id)
        return _canonical_response(
            {"project_id": project_id, "revisions": [r.to_dict() for r in records]}
        )

    @app.get("/projects/{project_id}/revisions/{sequence}/report")
    def get_report(project_id: str, sequence: int, user: str = Depends(current_user)):
        doc = service.get_report_document(project_id, sequence)
        return Response(content=doc, media_type="application/json")

    @app.get("/projects/{project_id}/archive")
    def archive(project_id: str, a: int, b: int, user: str = Depends(current_user)):
        doc_a, doc_b = service.archive_documents(project_id, a, b)
        body = b'{"a":' + doc_a + b',"b":' + doc_b + b"}"
        return Response(content=body, media_type="application/json")

    @app.get("/artifacts/{path:path}")
    def artifact(path: str, user: str = Depends(current_user)):
        data = service.store.read_artifact(path)
        return Response(content=data, media_type="image/png")

    return app


def create_app_from_env() -> FastAPI:
    """App factory for `uvicorn --factory vizcritic.service:create_app_from_env`.

    Environment: VIZCRITIC_STORAGE (storage root, default ./vizcritic-data),
    VIZCRITIC_MODE (live/replay/record), VIZCRITIC_EXCHANGES (store path),
    VIZCRITIC_THRESHOLDS (thresholds json), VIZCRITIC_TOKENS (json file
    mapping token -> user id), VIZCRITIC_BACKEND_<NAME>_URL for
    saliency/ocr/chart/detector/llm backends.
    """
    import os

    from . import backends as be
    from .config import load_thresholds
    from .feedback import ExchangeStore
    from .pipeline import Backends, utc_now_iso

    storage = os.environ.get("VIZCRITIC_STORAGE", "./vizcritic-data")
    mode = os.environ.get("VIZCRITIC_MODE", "live")
    config_path = os.environ.get("VIZCRITIC_THRESHOLDS")
    exchange_path = os.environ.get("VIZCRITIC_EXCHANGES")
    tokens_path = os.environ.get("VIZCRITIC_TOKENS")

    backend_urls = {
        name: os.environ.get(f"VIZCRITIC_BACKEND_{name.upper()}_URL")
        for name in ("saliency", "ocr", "chart", "detector", "llm")
    }
    backends = Backends()
    if backend_urls["saliency"]:
        backends.saliency = be.HttpSaliency(backend_urls["saliency"])
    if backend_urls["ocr"]:
        backends.ocr = be.HttpOcr(backend_urls["ocr"])
    if backend_urls["chart"]:
        backends.chart_table = be.HttpChartTable(backend_urls["chart"])
    if backend_urls["detector"]:
        backends.detector = be.HttpDetector(backend_urls["detector"])
    if backend_urls["llm"]:
        backends.llm = be.HttpLlm(backend_urls["llm"])

    ctx = AnalysisContext(backends=backends, mode=mode)
    if config_path:
        ctx.config = load_thresholds(config_path)
    if exchange_path:
        ctx.exchange_store = ExchangeStore(exchange_path)

    tokens = {}
    if tokens_path:
        tokens = json.loads(open(tokens_path, encoding="utf-8").read())

    store = FileStore(storage, utc_now_iso)
    service = ProjectService(store, ctx)
    return create_app(service, tokens)
