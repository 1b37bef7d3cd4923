"""HTTP API over a serving snapshot.

Read endpoints are pure functions of (snapshot, request, query cache), so
replaying a request yields an identical body. Feedback capture appends to a
line-delimited log; folding the log gives one latest-wins record per
(session, paper).
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .corpus import split_sentences
from .embedding import ProviderUnavailableError
from .search import (
    Query,
    SearchConfig,
    SearchHit,
    SentenceIndexError,
    faceted_search,
    make_query,
    zoom_in,
)
from .snapshot import Snapshot

DEFAULT_CACHE_TTL = 3600.0  # seconds a cached query vector stays valid

DEFAULT_T = 10
DEFAULT_L = 100
DEFAULT_M = 5

NOVELTY_LEVELS = (1, 2, 3)  # seen exact paper / similar ideas / nothing like it


class SearchRequest(BaseModel):
    abstract: str
    sentence_index: int
    t: int | None = None


class ZoomRequest(BaseModel):
    query_id: str
    selected_clusters: list[int]
    l: int | None = None
    m: int | None = None


class FeedbackRequest(BaseModel):
    session_id: str
    paper_id: str
    novelty: int
    relevance: bool


@dataclass
class _CachedQuery:
    query: Query
    sentences: list[str]
    per_cluster_hits: int
    expires_at: float


class QueryCache:
    """Keyed by content hash of (abstract, sentence_index); entries expire
    after the TTL. The clock is injectable for tests."""

    def __init__(self, ttl: float = DEFAULT_CACHE_TTL, now=time.monotonic):
        self._ttl = ttl
        self._now = now
        self._entries: dict[str, _CachedQuery] = {}
        self._lock = threading.Lock()

    @staticmethod
    def key_for(abstract: str, sentence_index: int) -> str:
        digest = hashlib.sha256(
            f"{abstract}\x1f{sentence_index}".encode("utf-8")).hexdigest()
        return digest[:24]

    def put(self, query: Query, sentences: list[str], per_cluster_hits: int) -> str:
        key = self.key_for(query.abstract, query.sentence_index)
        with self._lock:
            self._entries[key] = _CachedQuery(
                query=query, sentences=sentences,
                per_cluster_hits=per_cluster_hits,
                expires_at=self._now() + self._ttl)
        return key

    def get(self, key: str) -> _CachedQuery | None:
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                return None
            if entry.expires_at < self._now():
                del self._entries[key]
                return None
            return entry


def _hit_json(hit: SearchHit) -> dict:
    body = {
        "paper_id": hit.doc_id,
        "title": hit.title,
        "abstract": hit.abstract,
        "position": hit.position,
        "sentence": hit.sentence_text,
        "score": hit.score,
        "cluster_id": hit.cluster_id,
    }
    if hit.title_spans is not None:
        body["title_spans"] = hit.title_spans
        body["abstract_spans"] = hit.abstract_spans
    return body


def append_feedback(log_path: Path, record: dict) -> None:
    with open(log_path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def fold_feedback(log_path: Path) -> dict[tuple[str, str], dict]:
    """Replay the append-only log; the latest record per (session, paper) wins."""
    folded: dict[tuple[str, str], dict] = {}
    if not Path(log_path).exists():
        return folded
    for line in Path(log_path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        folded[(record["session_id"], record["paper_id"])] = record
    return folded


def create_app(snapshot: Snapshot, feedback_log: str | Path = "feedback.jsonl",
               cache_ttl: float = DEFAULT_CACHE_TTL, now=time.monotonic,
               cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="domainlens", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    cache = QueryCache(ttl=cache_ttl, now=now)
    feedback_path = Path(feedback_log)
    feedback_write_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.post("/api/search")
    def search(body: SearchRequest):
        t = body.t if body.t is not None else DEFAULT_T
        if t < 1:
            return JSONResponse(status_code=400,
                                content={"detail": "t must be >= 1"})
        try:
            query = make_query(body.abstract, body.sentence_index,
                               snapshot.sentence_provider)
        except SentenceIndexError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        except ValueError as exc:
            return JSONResponse(status_code=400,
                                content={"detail": f"bad abstract: {exc}"})
        except ProviderUnavailableError as exc:
            return JSONResponse(status_code=503, content={"detail": str(exc)})

        cfg = SearchConfig(per_cluster_hits=t,
                           zoom_total=max(DEFAULT_L, 2 * t))
        groups = faceted_search(query, cfg, snapshot)
        sentences = split_sentences(body.abstract)
        query_id = cache.put(query, sentences, t)
        return {
            "query_id": query_id,
            "sentences": sentences,
            "groups": [
                {
                    "cluster_id": g.cluster_id,
                    "descriptors": g.descriptors,
                    "hits": [_hit_json(h) for h in g.hits],
                }
                for g in groups
            ],
        }

    @app.post("/api/zoom")
    def zoom(body: ZoomRequest):
        entry = cache.get(body.query_id)
        if entry is None:
            return JSONResponse(status_code=404,
                                content={"detail": "unknown or expired query_id"})
        if not body.selected_clusters:
            return JSONResponse(status_code=400,
                                content={"detail": "selected_clusters must be non-empty"})
        l = body.l if body.l is not None else DEFAULT_L
        m = body.m if body.m is not None else DEFAULT_M
        if l <= entry.per_cluster_hits:
            return JSONResponse(
                status_code=400,
                content={"detail": f"l={l} must exceed t={entry.per_cluster_hits}"})
        try:
            cfg = SearchConfig(per_cluster_hits=entry.per_cluster_hits,
                               zoom_total=l, local_cluster_count=m)
            result = zoom_in(entry.query, body.selected_clusters, cfg,
                             snapshot, seed=snapshot.seed)
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        return {
            "query_id": body.query_id,
            "selected_clusters": result.selected,
            "local_groups": [
                {
                    "local_id": g.local_id,
                    "descriptors": g.descriptors,
                    "hits": [_hit_json(h) for h in g.hits],
                }
                for g in result.local_groups
            ],
        }

    @app.get("/api/clusters")
    def clusters():
        sizes = snapshot.clusters.model.sizes
        return {
            "clusters": [
                {
                    "id": cluster_id,
                    "size": int(sizes[cluster_id]),
                    "descriptors": snapshot.clusters.descriptors[cluster_id],
                }
                for cluster_id in range(snapshot.clusters.n_clusters)
            ]
        }

    @app.post("/api/feedback", status_code=204)
    def feedback(body: FeedbackRequest):
        if body.novelty not in NOVELTY_LEVELS:
            return JSONResponse(
                status_code=400,
                content={"detail": f"novelty must be one of {NOVELTY_LEVELS}"})
        record = {
            "session_id": body.session_id,
            "paper_id": body.paper_id,
            "novelty": body.novelty,
            "relevance": body.relevance,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        with feedback_write_lock:
            append_feedback(feedback_path, record)
        return Response(status_code=204)

    return app
