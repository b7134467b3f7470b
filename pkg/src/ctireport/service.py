"""FastAPI service exposing the graph-exploration and generation API.

Sessions are in-memory view state with a TTL; the knowledge base is the
only durable state and is never mutated except through the explicit ingest
endpoint, which is disabled unless the service is started with it enabled.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import Config, load_config
from .graph import EntityGraph, GraphError, expand_node, graph_from_scope
from .kb import KnowledgeBase
from .pipeline import GenerationResult, generate_report
from .rewrite import PassthroughProvider, RemoteChatProvider, ReplayProvider
from .selection import SelectionError
from .stix import parse_bundle, StixParseError, StixValidationError

SESSION_TTL_SECONDS = 3600.0


class CreateSessionRequest(BaseModel):
    root_ids: list[str] = Field(min_length=1)
    expand: list[str] = Field(default_factory=list)


class ExpandRequest(BaseModel):
    node_id: str


class GenerateRequest(BaseModel):
    report_type: str
    focus_id: Optional[str] = None
    rewrite: bool = False
    provider: Optional[str] = None
    transcript_path: Optional[str] = None


class NodeModel(BaseModel):
    id: str
    type: str
    name: str
    expanded: bool


class EdgeModel(BaseModel):
    source: str
    relationship_type: str
    target: str


class GraphModel(BaseModel):
    session_id: str
    nodes: list[NodeModel]
    edges: list[EdgeModel]


class IngestRequest(BaseModel):
    bundle: dict
    source_label: str = "api"


def known_entity_names(kb: KnowledgeBase) -> tuple[str, ...]:
    names = []
    for entity_id in kb.entity_ids():
        record = kb.get_entity(entity_id)
        if record is not None:
            names.append(record.object.display_name())
    return tuple(sorted(set(names)))


@dataclass
class SessionState:
    session_id: str
    graph: EntityGraph
    created: float = field(default_factory=time.monotonic)
    last_result: Optional[GenerationResult] = None


def _graph_payload(session: SessionState) -> dict:
    graph = session.graph
    nodes = [
        NodeModel(
            id=node_id,
            type=obj.type,
            name=obj.display_name(),
            expanded=node_id in graph.expanded,
        ).model_dump()
        for node_id, obj in sorted(graph.nodes.items())
    ]
    edges = [
        EdgeModel(source=e.source, relationship_type=e.relationship_type,
                  target=e.target).model_dump()
        for e in graph.sorted_edges()
    ]
    return {"session_id": session.session_id, "nodes": nodes, "edges": edges}


def create_app(kb_path: str, config: Optional[Config] = None,
               enable_ingest: bool = False,
               session_ttl: float = SESSION_TTL_SECONDS) -> FastAPI:
    kb = KnowledgeBase(kb_path)
    cfg = config or load_config()
    sessions: dict[str, SessionState] = {}

    app = FastAPI(title="CTI report service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )

    def _session(session_id: str) -> SessionState:
        now = time.monotonic()
        for sid in [s for s, state in sessions.items()
                    if now - state.created > session_ttl]:
            del sessions[sid]
        state = sessions.get(session_id)
        if state is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown session {session_id}")
        return state

    def _provider(request: GenerateRequest):
        kind = request.provider or cfg.rewrite.provider
        if kind == "passthrough":
            return PassthroughProvider()
        if kind == "recorded-replay":
            path = request.transcript_path or cfg.rewrite.transcript_path
            if not path:
                raise HTTPException(status_code=400,
                                    detail="replay provider needs a transcript path")
            return ReplayProvider(path)
        if kind == "remote-chat":
            return RemoteChatProvider(endpoint=cfg.rewrite.endpoint,
                                      model=cfg.rewrite.model,
                                      api_key_env=cfg.rewrite.api_key_env)
        raise HTTPException(status_code=400,
                            detail=f"unknown provider kind {kind!r}")

    @app.get("/api/v1/health")
    def health() -> dict:
        return {"status": "ok", "entities": len(kb.entity_ids())}

    @app.get("/api/v1/entities")
    def entities(type: Optional[str] = None) -> dict:
        if type:
            records = kb.query_by_type(type)
        else:
            records = [kb.get_entity(i) for i in kb.entity_ids()]
        return {"entities": [
            {"id": r.object.id, "type": r.object.type,
             "name": r.object.display_name()}
            for r in records if r is not None
        ]}

    @app.post("/api/v1/sessions")
    def create_session(request: CreateSessionRequest) -> dict:
        try:
            graph = graph_from_scope(kb, request.root_ids, request.expand)
        except GraphError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        session = SessionState(session_id=uuid.uuid4().hex, graph=graph)
        sessions[session.session_id] = session
        return _graph_payload(session)

    @app.get("/api/v1/sessions/{session_id}/graph")
    def get_graph(session_id: str) -> dict:
        return _graph_payload(_session(session_id))

    @app.post("/api/v1/sessions/{session_id}/expand")
    def expand(session_id: str, request: ExpandRequest) -> dict:
        session = _session(session_id)
        try:
            session.graph = expand_node(session.graph, request.node_id, kb)
        except GraphError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return _graph_payload(session)

    @app.post("/api/v1/sessions/{session_id}/generate")
    def generate(session_id: str, request: GenerateRequest):
        session = _session(session_id)
        provider = _provider(request) if request.rewrite else None
        try:
            result = generate_report(
                session.graph, request.report_type, kb=kb,
                focus_id=request.focus_id, provider=provider,
                known_names=known_entity_names(kb),
                threshold=cfg.rewrite.threshold,
                retries=cfg.rewrite.retries,
                rate_in=cfg.rewrite.rate_in,
                rate_out=cfg.rewrite.rate_out,
            )
        except (SelectionError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        session.last_result = result

        payload = {
            "session_id": session_id,
            "report_type": request.report_type,
            "template_text": result.template_text,
            "final_text": result.final_text,
            "document": result.document.to_dict(),
            "metrics": result.metrics,
            "rewrite": result.rewrite_result.to_dict()
            if result.rewrite_result else None,
        }
        if (result.rewrite_result is not None
                and result.rewrite_result.gate == "fell_back"
                and result.rewrite_result.warning):
            # Provider failed; the fallback result is still included.
            return JSONResponse(status_code=502, content=payload)
        return payload

    @app.get("/api/v1/sessions/{session_id}/report")
    def last_report(session_id: str) -> dict:
        session = _session(session_id)
        if session.last_result is None:
            raise HTTPException(status_code=404,
                                detail="no report generated in this session")
        result = session.last_result
        return {
            "session_id": session_id,
            "template_text": result.template_text,
            "final_text": result.final_text,
            "document": result.document.to_dict(),
            "metrics": result.metrics,
        }

    @app.post("/api/v1/ingest")
    def ingest(request: IngestRequest) -> dict:
        if not enable_ingest:
            raise HTTPException(status_code=403,
                                detail="ingest endpoint is disabled")
        import json as _json
        try:
            bundle = parse_bundle(_json.dumps(request.bundle),
                                  source_label=request.source_label)
        except (StixParseError, StixValidationError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        ids = kb.ingest(bundle)
        return {"stored": len(ids), "ids": ids}

    return app
