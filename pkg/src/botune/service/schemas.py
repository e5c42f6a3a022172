"""Request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"


class ErrorDetail(BaseModel):
    category: str  # "config" | "data" | "internal"
    message: str


class SynthRequest(BaseModel):
    n_rows: int = 5000
    n_features: int = 14
    anomaly_fraction: float = Field(default=1.0 / 3.0)
    difficulty: float = 0.3
    seed: int = 0
    out_path: str
    schema_path: str | None = None


class SynthResponse(BaseModel):
    csv_path: str
    schema_path: str
    n_rows: int
    n_features: int
    n_anomalies: int


class RunRequest(BaseModel):
    """Submit an experiment from a server-side config path or raw config text."""

    config_path: str | None = None
    config_text: str | None = None
    base_dir: str = "."
    wait: bool = True


class FamilySummary(BaseModel):
    baseline_params: dict | None = None
    baseline_train: dict | None = None
    baseline_test: dict | None = None
    best_params: dict | None = None
    tuned_train: dict | None = None
    tuned_test: dict | None = None
    evaluations: int = 0
    elapsed_seconds: float = 0.0
    error: str | None = None


class RunStatus(BaseModel):
    run_id: str
    status: str  # queued | running | done | error
    output_dir: str | None = None
    families: dict[str, FamilySummary] | None = None
    elapsed_seconds: float | None = None
    error: ErrorDetail | None = None


class TraceRequest(BaseModel):
    trials_path: str
    out_path: str


class TraceResponse(BaseModel):
    out_path: str
    rows: int


class ContourRequest(BaseModel):
    run_dir: str
    param_x: str
    param_y: str
    family: str | None = None
    resolution: int = 50
    out_path: str | None = None


class ContourResponse(BaseModel):
    out_path: str
    family: str
    rows: int
