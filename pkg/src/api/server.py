"""
FastAPI service: health/status, question answering over the loaded graph, stored priors lookup.
"""

import logging
from typing import List, Optional

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..config import RunConfig, build_gateway, with_engine
from ..engine import answer_question
from ..errors import BackendError, ConfigError, KGTrailError
from ..graph import KnowledgeGraph, graph_stats
from ..llm import LLMBackend
from ..memory import PriorsStore

logger = logging.getLogger("kgtrail.api")


class AskRequest(BaseModel):
    """Request model for one question."""
    question: str
    topics: List[str]
    id: Optional[str] = None
    k: Optional[int] = None
    depth: Optional[int] = None
    iters: Optional[int] = None
    threshold: Optional[float] = None
    priors_name: Optional[str] = None  # load from and save back to the priors store


def create_app(
    graph: KnowledgeGraph,
    run_config: RunConfig,
    backend: Optional[LLMBackend] = None,
    priors_store: Optional[PriorsStore] = None,
) -> FastAPI:
    app = FastAPI(title="KGTrail API", version="1.0.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    gateway = build_gateway(run_config, backend)
    stats = graph_stats(graph)
    asked = [0]

    # ==================== Health & Status ====================
    @app.get("/api/status")
    @app.get("/status")
    def status():
        """Health check."""
        return {"status": "ok", "service": "KGTrail", "graph": stats, "questions_answered": asked[0]}

    # ==================== Question Answering ====================
    @app.post("/api/ask")
    def ask(request: AskRequest):
        """Answer one question; the response embeds the ledger and the effective config."""
        overrides = {
            name: value
            for name, value in (
                ("candidates_k", request.k),
                ("max_depth", request.depth),
                ("max_iterations", request.iters),
                ("threshold", request.threshold),
            )
            if value is not None
        }
        try:
            scoped = with_engine(run_config, **overrides)
        except ConfigError as e:
            return JSONResponse({"error": str(e)}, status_code=400)

        question_id = request.id or f"api-{asked[0] + 1}"
        priors = None
        if request.priors_name:
            if priors_store is None:
                return JSONResponse({"error": "Priors store not configured"}, status_code=503)
            priors = priors_store.get(request.priors_name)

        try:
            result = answer_question(
                request.question, request.topics, graph, scoped.engine,
                gateway.for_question(question_id), priors=priors, question_id=question_id,
                run_config=scoped.to_dict(),
            )
        except BackendError as e:
            logger.error("Backend failure on %s: %s", question_id, e)
            return JSONResponse({"error": str(e)}, status_code=502)
        except KGTrailError as e:
            return JSONResponse({"error": str(e)}, status_code=400)

        if request.priors_name and priors_store is not None:
            priors_store.put(request.priors_name, result.priors)
        asked[0] += 1
        if result.all_steps_degraded and result.answer.is_empty:
            return JSONResponse({**result.to_dict(), "error": "backend failed on every step"}, status_code=502)
        return {**result.to_dict(), "id": question_id, "config": scoped.to_dict()}

    # ==================== Exploration Priors ====================
    @app.get("/api/priors")
    def list_priors():
        if priors_store is None:
            return JSONResponse({"priors": [], "error": "Priors store not configured"}, status_code=503)
        names = priors_store.names()
        return {"priors": names, "count": len(names)}

    @app.get("/api/priors/{name}")
    def get_priors(name: str):
        if priors_store is None:
            return JSONResponse({"error": "Priors store not configured"}, status_code=503)
        priors = priors_store.get(name)
        if priors is None:
            return JSONResponse({"error": "Priors not found"}, status_code=404)
        return priors.to_dict()

    return app
