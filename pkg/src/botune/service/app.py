"""FastAPI service wrapping the experiment engine.

Experiments can run synchronously (``wait=true``, the CLI default) or as
background jobs polled through ``GET /runs/{run_id}``. Paths in requests
are resolved on the server's filesystem; the bundled CLI talks to an
in-process instance by default, so paths behave like local ones.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import asdict
from pathlib import Path

from fastapi import FastAPI, HTTPException

from ..bayesopt import TrialLog
from ..data import synthesize_benchmark, write_benchmark_schema, write_csv
from ..errors import BotuneError, ConfigError, DataError
from ..experiment import (
    ExperimentConfig,
    RunSummary,
    emit_contour,
    emit_trace,
    load_config,
    load_run_space,
    parse_config_text,
    rebuild_surrogate,
    run_experiment,
)
from . import schemas


def _category(exc: BotuneError) -> str:
    if isinstance(exc, ConfigError):
        return "config"
    if isinstance(exc, DataError):
        return "data"
    return "internal"


def _http_error(exc: BotuneError) -> HTTPException:
    return HTTPException(
        status_code=400,
        detail={"category": _category(exc), "message": str(exc)},
    )


class _JobStore:
    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[str, schemas.RunStatus] = {}

    def create(self, run_id: str, status: schemas.RunStatus) -> None:
        with self._lock:
            self._jobs[run_id] = status

    def update(self, run_id: str, status: schemas.RunStatus) -> None:
        with self._lock:
            self._jobs[run_id] = status

    def get(self, run_id: str) -> schemas.RunStatus | None:
        with self._lock:
            return self._jobs.get(run_id)


def _summary_to_status(run_id: str, summary: RunSummary) -> schemas.RunStatus:
    families = {}
    for name, fr in summary.families.items():
        payload = asdict(fr)
        payload.pop("family", None)
        payload.pop("seed", None)
        for key in ("baseline_train", "baseline_test", "tuned_train", "tuned_test"):
            if payload[key] is not None:
                payload[key] = dict(payload[key])
        families[name] = schemas.FamilySummary(**payload)
    return schemas.RunStatus(
        run_id=run_id,
        status="done",
        output_dir=summary.output_dir,
        families=families,
        elapsed_seconds=summary.elapsed_seconds,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="botune", version="0.1.0")
    jobs = _JobStore()

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz() -> schemas.HealthResponse:
        return schemas.HealthResponse()

    @app.post("/synth", response_model=schemas.SynthResponse)
    def synth(req: schemas.SynthRequest) -> schemas.SynthResponse:
        try:
            data = synthesize_benchmark(
                n_rows=req.n_rows,
                n_features=req.n_features,
                anomaly_fraction=req.anomaly_fraction,
                difficulty=req.difficulty,
                seed=req.seed,
            )
            out = Path(req.out_path)
            out.parent.mkdir(parents=True, exist_ok=True)
            write_csv(data, out)
            schema_path = Path(req.schema_path) if req.schema_path else out.with_suffix(".schema")
            write_benchmark_schema(req.n_features, schema_path)
        except BotuneError as exc:
            raise _http_error(exc)
        return schemas.SynthResponse(
            csv_path=str(out),
            schema_path=str(schema_path),
            n_rows=data.n_rows,
            n_features=data.n_features,
            n_anomalies=int(data.labels.sum()),
        )

    def _load_request_config(req: schemas.RunRequest) -> ExperimentConfig:
        if (req.config_path is None) == (req.config_text is None):
            raise ConfigError("provide exactly one of config_path or config_text")
        if req.config_path is not None:
            return load_config(req.config_path)
        return parse_config_text(req.config_text, base_dir=req.base_dir)

    @app.post("/runs", response_model=schemas.RunStatus)
    def submit_run(req: schemas.RunRequest) -> schemas.RunStatus:
        try:
            config = _load_request_config(req)
        except BotuneError as exc:
            raise _http_error(exc)
        run_id = uuid.uuid4().hex
        if req.wait:
            try:
                summary = run_experiment(config)
            except BotuneError as exc:
                raise _http_error(exc)
            status = _summary_to_status(run_id, summary)
            jobs.create(run_id, status)
            return status

        jobs.create(run_id, schemas.RunStatus(run_id=run_id, status="queued"))

        def work() -> None:
            jobs.update(run_id, schemas.RunStatus(run_id=run_id, status="running"))
            try:
                summary = run_experiment(config)
            except Exception as exc:  # job boundary: report, don't crash the worker
                category = _category(exc) if isinstance(exc, BotuneError) else "internal"
                jobs.update(
                    run_id,
                    schemas.RunStatus(
                        run_id=run_id,
                        status="error",
                        error=schemas.ErrorDetail(category=category, message=str(exc)),
                    ),
                )
                return
            jobs.update(run_id, _summary_to_status(run_id, summary))

        threading.Thread(target=work, daemon=True).start()
        return jobs.get(run_id)

    @app.get("/runs/{run_id}", response_model=schemas.RunStatus)
    def get_run(run_id: str) -> schemas.RunStatus:
        status = jobs.get(run_id)
        if status is None:
            raise HTTPException(status_code=404, detail={"category": "config", "message": f"unknown run id {run_id}"})
        return status

    @app.post("/trace", response_model=schemas.TraceResponse)
    def trace(req: schemas.TraceRequest) -> schemas.TraceResponse:
        try:
            log = TrialLog.from_jsonl(req.trials_path)
            emit_trace(log, req.out_path)
        except BotuneError as exc:
            raise _http_error(exc)
        return schemas.TraceResponse(out_path=req.out_path, rows=len(log))

    @app.post("/contour", response_model=schemas.ContourResponse)
    def contour(req: schemas.ContourRequest) -> schemas.ContourResponse:
        try:
            family, space, seed = load_run_space(req.run_dir, req.family, req.param_x, req.param_y)
            log = TrialLog.from_jsonl(Path(req.run_dir) / f"{family}_trials.jsonl")
            model = rebuild_surrogate(log, space, seed)
            out = (
                Path(req.out_path)
                if req.out_path
                else Path(req.run_dir) / f"{family}_contour_{req.param_x}_{req.param_y}.csv"
            )
            rows = emit_contour(model, space, req.param_x, req.param_y, req.resolution, out)
        except BotuneError as exc:
            raise _http_error(exc)
        return schemas.ContourResponse(out_path=str(out), family=family, rows=rows)

    return app


app = create_app()
