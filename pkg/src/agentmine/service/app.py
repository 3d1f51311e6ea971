"""FastAPI application exposing the toolkit operations."""
from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..errors import AgentMineError
from . import handlers
from . import models as m


def create_app() -> FastAPI:
    app = FastAPI(
        title="agentmine",
        description="Compositional discovery and verification of multi-agent workflow nets",
        version="0.1.0",
    )

    def guard(fn, req):
        try:
            return fn(req)
        except handlers.INPUT_ERRORS as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except AgentMineError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/check/gwf", response_model=m.CheckGwfResponse)
    def check_gwf(req: m.CheckGwfRequest):
        return guard(handlers.check_gwf, req)

    @app.post("/check/soundness", response_model=m.CheckSoundnessResponse)
    def check_soundness(req: m.CheckSoundnessRequest):
        return guard(handlers.soundness, req)

    @app.post("/check/morphism", response_model=m.CheckMorphismResponse)
    def check_morphism(req: m.CheckMorphismRequest):
        return guard(handlers.morphism, req)

    @app.post("/compose", response_model=m.ComposeResponse)
    def compose(req: m.ComposeRequest):
        return guard(handlers.compose, req)

    @app.post("/refine", response_model=m.RefineResponse)
    def refine(req: m.RefineRequest):
        return guard(handlers.refine, req)

    @app.post("/project", response_model=m.ProjectResponse)
    def project(req: m.ProjectRequest):
        return guard(handlers.project_log, req)

    @app.post("/discover", response_model=m.DiscoverResponse)
    def discover(req: m.DiscoverRequest):
        return guard(handlers.discover, req)

    @app.post("/replay", response_model=m.QualityResponse)
    def replay(req: m.QualityRequest):
        return guard(handlers.replay, req)

    @app.post("/precision", response_model=m.QualityResponse)
    def precision(req: m.QualityRequest):
        return guard(handlers.precision, req)

    @app.post("/playout", response_model=m.PlayoutResponse)
    def playout(req: m.PlayoutRequest):
        return guard(handlers.playout_log, req)

    @app.post("/pipeline", response_model=m.PipelineResponse)
    def pipeline(req: m.PipelineRequest):
        return guard(handlers.pipeline, req)

    return app


app = create_app()
