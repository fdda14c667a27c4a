"""FastAPI application exposing the experiment runner."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..types import NonFiniteEvaluationError, UnknownObjectiveError
from . import handlers
from .models import (
    AuditRequest,
    AuditResponse,
    HealthResponse,
    ObjectiveInfo,
    RunRequest,
    RunResponse,
    SweepRequest,
    SweepResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="dimcurse",
        description=(
            "Minimize catalog objectives on the unit cube by recursively "
            "composing univariate Lipschitz optimizers; audit the regret "
            "bounds on the results."
        ),
        version="0.1.0",
    )

    def _guard(fn, request):
        try:
            return fn(request)
        except UnknownObjectiveError as exc:
            raise HTTPException(
                status_code=404,
                detail={"code": "unknown-objective", "message": str(exc)},
            ) from exc
        except handlers.ConfigError as exc:
            raise HTTPException(
                status_code=400,
                detail={"code": "invalid-budget", "message": str(exc)},
            ) from exc
        except NonFiniteEvaluationError as exc:
            raise HTTPException(
                status_code=500,
                detail={
                    "code": "non-finite-evaluation",
                    "message": str(exc),
                    "t": exc.record.t,
                    "point": list(exc.record.point),
                },
            ) from exc

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok")

    @app.get("/objectives", response_model=list[ObjectiveInfo])
    def objectives() -> list[ObjectiveInfo]:
        return handlers.list_objectives()

    @app.post("/run", response_model=RunResponse)
    def run_experiment(request: RunRequest) -> RunResponse:
        return _guard(handlers.handle_run, request)

    @app.post("/audit", response_model=AuditResponse)
    def audit_experiment(request: AuditRequest) -> AuditResponse:
        return _guard(handlers.handle_audit, request)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep_experiment(request: SweepRequest) -> SweepResponse:
        return _guard(handlers.handle_sweep, request)

    return app


app = create_app()
