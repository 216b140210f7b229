"""REST back-end over an immutable snapshot.

Every handler resolves the current snapshot exactly once, so requests in
flight during a reload finish against the version they started with; a
reload installs the new snapshot with a single reference swap. Search
requests never touch persisted state; only ratings write (users.jsonl,
rewritten atomically). Users are identified by an unauthenticated random
cookie, issued on first contact.
"""
from __future__ import annotations

import io
import logging
import secrets
import tarfile
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .documents import Document, document_to_json
from .errors import CorruptSnapshot, LitatlasError, MissingSnapshot, UnknownDocument
from .recommend import VERDICTS, rate, recommend
from .search import search_text
from .similarity import top_k_similar
from .store import ModelSnapshot, UserStore, load_snapshot, save_snapshot
from .store import snapshot_version as _snapshot_version

log = logging.getLogger(__name__)

USER_COOKIE = "litatlas_uid"


@dataclass(frozen=True)
class ServingState:
    """Everything derived from one snapshot, shared read-only by handlers."""

    snapshot: ModelSnapshot
    by_id: dict[str, Document]
    map_payload: list[dict]

    @classmethod
    def from_snapshot(cls, snapshot: ModelSnapshot) -> "ServingState":
        by_id = {d.doc_id: d for d in snapshot.documents}
        payload = []
        for doc_id, (x, y) in zip(snapshot.embedding.ids, snapshot.embedding.points):
            doc = by_id[doc_id]
            payload.append(
                {
                    "doc_id": doc_id,
                    "x": float(x),
                    "y": float(y),
                    "title": doc.title,
                    "year": doc.published_year,
                    "venue": doc.venue,
                }
            )
        return cls(snapshot=snapshot, by_id=by_id, map_payload=payload)


class SnapshotHolder:
    """Atomic pointer to the serving state; reload swaps it in one assignment."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._state = ServingState.from_snapshot(load_snapshot(self.path))

    @property
    def current(self) -> ServingState:
        return self._state

    def reload(self) -> ServingState:
        state = ServingState.from_snapshot(load_snapshot(self.path))
        with self._lock:
            self._state = state
        return state


class SearchBody(BaseModel):
    text: str
    limit: int = 20


class RatingBody(BaseModel):
    verdict: str


def _doc_json(doc: Document) -> dict:
    return document_to_json(doc)


def _summary(doc: Document, score: float | None = None) -> dict:
    out = {
        "doc_id": doc.doc_id,
        "title": doc.title,
        "year": doc.published_year,
        "venue": doc.venue,
    }
    if score is not None:
        out["score"] = score
    return out


def create_app(
    snapshot_dir: str | Path,
    state_dir: str | Path | None = None,
    static_dir: str | Path | None = None,
    similar_display: int = 10,
) -> FastAPI:
    snapshot_dir = Path(snapshot_dir)
    state_dir = Path(state_dir) if state_dir else snapshot_dir.parent
    holder = SnapshotHolder(snapshot_dir)
    users = UserStore(state_dir / "users.jsonl")
    user_lock = threading.Lock()

    app = FastAPI(title="litatlas")

    @app.exception_handler(LitatlasError)
    async def _domain_error(request: Request, exc: LitatlasError):
        status = 404 if isinstance(exc, (UnknownDocument, MissingSnapshot)) else 500
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.middleware("http")
    async def _identify_user(request: Request, call_next):
        user_id = request.cookies.get(USER_COOKIE)
        issued = False
        if not user_id and request.url.path.startswith("/api/"):
            user_id = secrets.token_hex(16)  # 128-bit token
            issued = True
        request.state.user_id = user_id
        response = await call_next(request)
        if issued:
            response.set_cookie(USER_COOKIE, user_id, httponly=True, samesite="lax")
        return response

    @app.get("/api/health")
    def health():
        state = holder.current
        return {
            "status": "ok",
            "corpus_version": state.snapshot.corpus_version,
            "snapshot_checksum": state.snapshot.checksum,
            "n_documents": len(state.snapshot.documents),
        }

    @app.get("/api/papers")
    def list_papers(limit: int = 20, offset: int = 0, q: str | None = None):
        state = holder.current
        if limit < 1 or offset < 0:
            return JSONResponse(
                status_code=400,
                content={"error": "BadRequest", "detail": "limit >= 1 and offset >= 0"},
            )
        if q:
            result = search_text(
                state.snapshot.inverted_index, state.snapshot.vocabulary, q, limit=limit
            )
            papers = [
                _summary(state.by_id[doc_id], score) for doc_id, score in result.ranked
            ]
            return {
                "total": result.truncated_at,
                "query_terms_matched": result.query_terms_matched,
                "papers": papers,
            }
        ordered = sorted(state.by_id)
        window = ordered[offset : offset + limit]
        return {
            "total": len(ordered),
            "papers": [_summary(state.by_id[doc_id]) for doc_id in window],
        }

    @app.get("/api/papers/{doc_id}")
    def get_paper(doc_id: str, similar: int | None = None):
        state = holder.current
        doc = state.by_id.get(doc_id)
        if doc is None:
            raise UnknownDocument(doc_id)
        neighbors = top_k_similar(state.snapshot.similarity_graph, doc_id)
        shown = neighbors[: similar or similar_display]
        return {
            "paper": _doc_json(doc),
            "similar": [
                _summary(state.by_id[n], score) for n, score in shown if n in state.by_id
            ],
        }

    @app.get("/api/map")
    def map_coordinates():
        return holder.current.map_payload

    @app.post("/api/search")
    def search(body: SearchBody):
        state = holder.current
        if body.limit < 1:
            return JSONResponse(
                status_code=400,
                content={"error": "BadRequest", "detail": "limit must be >= 1"},
            )
        result = search_text(
            state.snapshot.inverted_index,
            state.snapshot.vocabulary,
            body.text,
            limit=body.limit,
        )
        return {
            "results": [
                _summary(state.by_id[doc_id], score) for doc_id, score in result.ranked
            ],
            "query_terms_matched": result.query_terms_matched,
            "total": result.truncated_at,
        }

    @app.post("/api/papers/{doc_id}/rating")
    def rate_paper(doc_id: str, body: RatingBody, request: Request):
        state = holder.current
        if body.verdict not in VERDICTS:
            return JSONResponse(
                status_code=400,
                content={
                    "error": "BadRequest",
                    "detail": f"verdict must be one of {list(VERDICTS)}",
                },
            )
        user_id = request.state.user_id
        with user_lock:
            profile = users.get(user_id)
            profile = rate(profile, doc_id, body.verdict, corpus_ids=set(state.by_id))
            users.put(profile)
        return {"doc_id": doc_id, "verdict": body.verdict, "user_id": user_id}

    @app.get("/api/recommendations")
    def recommendations(request: Request, limit: int = 20):
        state = holder.current
        user_id = request.state.user_id
        profile = users.get(user_id) if user_id else None
        if profile is None or not profile.ratings:
            return {"recommendations": []}
        ranked = recommend(profile, state.snapshot.similarity_graph, n=limit)
        return {
            "recommendations": [
                _summary(state.by_id[doc_id], score)
                for doc_id, score in ranked
                if doc_id in state.by_id
            ]
        }

    @app.post("/api/reload")
    def reload_snapshot():
        state = holder.reload()
        return {
            "status": "reloaded",
            "corpus_version": state.snapshot.corpus_version,
            "snapshot_checksum": state.snapshot.checksum,
        }

    @app.post("/api/snapshot")
    async def install_snapshot(request: Request):
        # remote-update workflow: a locally built snapshot is uploaded as a
        # gzipped tar, validated, atomically installed, then served
        body = await request.body()
        try:
            with tempfile.TemporaryDirectory(dir=snapshot_dir.parent) as staging:
                with tarfile.open(fileobj=io.BytesIO(body), mode="r:gz") as archive:
                    _safe_extract(archive, Path(staging))
                incoming = load_snapshot(Path(staging))  # full validation
                checksum = save_snapshot(incoming, snapshot_dir)
        except (tarfile.TarError, CorruptSnapshot, MissingSnapshot) as exc:
            return JSONResponse(
                status_code=400,
                content={"error": "BadSnapshot", "detail": str(exc)},
            )
        state = holder.reload()
        return {
            "status": "installed",
            "corpus_version": state.snapshot.corpus_version,
            "snapshot_checksum": checksum,
        }

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    app.state.holder = holder
    return app


def _safe_extract(archive: tarfile.TarFile, target: Path) -> None:
    for member in archive.getmembers():
        member_path = (target / member.name).resolve()
        if not str(member_path).startswith(str(target.resolve())):
            raise tarfile.TarError(f"unsafe path in archive: {member.name}")
    archive.extractall(target)


def current_snapshot_version(path: str | Path) -> int | None:
    return _snapshot_version(path)
