from .app import app, create_app
from .models import (
    AuditRequest,
    AuditResponse,
    RunRequest,
    RunResponse,
    SweepRequest,
    SweepResponse,
)

__all__ = [
    "app",
    "create_app",
    "AuditRequest",
    "AuditResponse",
    "RunRequest",
    "RunResponse",
    "SweepRequest",
    "SweepResponse",
]
