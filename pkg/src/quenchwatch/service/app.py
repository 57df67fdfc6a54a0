"""JSON-over-HTTP surface under /v1, plus optional static dashboard hosting.

Error mapping: malformed requests are 400, unknown resources 404, an
infeasible synthetic spec or an incompatible model 422, an idempotency
token replayed with a different payload 409, an empty sample range 416.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from pathlib import Path

import numpy as np
from fastapi import APIRouter, Body, FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from quenchwatch import __version__
from quenchwatch.analyzers.base import available_analyzers
from quenchwatch.analyzers.quench import IncompatibleModel
from quenchwatch.engine.backend import KERNEL_KIND
from quenchwatch.ingest.synthetic import SpecInfeasible
from quenchwatch.service.jobs import (
    SYNC_ANALYSIS_LIMIT,
    JobManager,
    TokenConflict,
    run_analysis,
    select_windows,
)
from quenchwatch.service.store import (
    DataStore,
    MalformedRequest,
    NotFound,
    decimate_minmax,
)

router = APIRouter(prefix="/v1")


def _store(request: Request) -> DataStore:
    return request.app.state.store


def _jobs(request: Request) -> JobManager:
    return request.app.state.jobs


def _token(request: Request, body: dict) -> str | None:
    token = body.get("token")
    if token is None:
        token = request.headers.get("Idempotency-Token")
    if token is not None and not isinstance(token, str):
        raise HTTPException(400, "token must be a string")
    return token


@router.get("/meta")
def meta() -> dict:
    return {
        "name": "quenchwatch",
        "version": __version__,
        "kernel": KERNEL_KIND,
        "analyzers": available_analyzers(),
    }


# ------------------------------------------------------------------ datasets


@router.post("/datasets", status_code=201)
def create_dataset(request: Request, body: dict = Body(...)):
    store = _store(request)
    kind = body.get("kind")
    try:
        if kind == "synthetic":
            summary, created = store.create_synthetic_dataset(body)
        elif kind == "manifest":
            summary, created = store.create_manifest_dataset(body)
        else:
            raise HTTPException(400, f"kind must be 'synthetic' or 'manifest', got {kind!r}")
    except MalformedRequest as exc:
        raise HTTPException(400, str(exc)) from exc
    except SpecInfeasible as exc:
        raise HTTPException(422, str(exc)) from exc
    summary["created"] = created
    if not created:
        # Replay of an identical request: same id, same summary.
        return _json_response(summary, status_code=200)
    return summary


def _json_response(payload, status_code: int) -> JSONResponse:
    return JSONResponse(content=payload, status_code=status_code)


@router.get("/datasets")
def list_datasets(request: Request) -> list:
    return _store(request).list_datasets()


@router.get("/datasets/{dataset_id}")
def get_dataset(request: Request, dataset_id: str) -> dict:
    try:
        return _store(request).dataset_summary(dataset_id)
    except NotFound as exc:
        raise HTTPException(404, str(exc)) from exc


@router.get("/datasets/{dataset_id}/windows")
def list_windows(request: Request, dataset_id: str, kind: str = "all") -> list:
    store = _store(request)
    try:
        windows = store.dataset_windows(dataset_id, kind=kind)
    except NotFound as exc:
        raise HTTPException(404, str(exc)) from exc
    except MalformedRequest as exc:
        raise HTTPException(400, str(exc)) from exc
    return [
        {
            "window_id": w.window_id,
            "magnet_id": w.series_slice.magnet_id,
            "contains_quench": w.contains_quench,
            "t_event_offset": w.t_event_offset,
            "clamped": w.clamped,
            "sample_count": len(w.series_slice),
            "t0": w.series_slice.t0,
            "dt": w.series_slice.dt,
        }
        for w in windows
    ]


# ---------------------------------------------------------------------- jobs


@router.post("/jobs", status_code=202)
def submit_job(request: Request, body: dict = Body(...)):
    dataset_id = body.get("dataset_id")
    if not isinstance(dataset_id, str):
        raise HTTPException(400, "dataset_id must be a string")
    hp = body.get("hyperparameters")
    if hp is None:
        raise HTTPException(400, "hyperparameters are required")
    window_kind = body.get("window_kind", "normal")
    token = _token(request, body)
    try:
        record, created = _jobs(request).submit_training(
            dataset_id, hp, token=token, window_kind=window_kind
        )
    except MalformedRequest as exc:
        raise HTTPException(400, str(exc)) from exc
    except NotFound as exc:
        raise HTTPException(404, str(exc)) from exc
    except TokenConflict as exc:
        raise HTTPException(409, str(exc)) from exc
    payload = _job_view(record)
    if not created:
        return _json_response(payload, status_code=200)
    return payload


def _job_view(record: dict) -> dict:
    return {
        "job_id": record["job_id"],
        "dataset_id": record["dataset_id"],
        "hyperparameters": record["hyperparameters"],
        "window_kind": record["window_kind"],
        "status": record["status"],
        "trace": record["trace"],
        "created_at": record["created_at"],
        "model_id": record.get("model_id"),
        "default_threshold": record.get("default_threshold"),
        "error": record.get("error"),
    }


@router.get("/jobs")
def list_jobs(request: Request) -> list:
    return [_job_view(r) for r in _jobs(request).list_jobs()]


@router.get("/jobs/{job_id}")
def get_job(request: Request, job_id: str) -> dict:
    try:
        return _job_view(_jobs(request).get_job(job_id))
    except NotFound as exc:
        raise HTTPException(404, str(exc)) from exc


# -------------------------------------------------------------------- models


@router.get("/models")
def list_models(request: Request) -> list:
    return _store(request).list_models()


@router.get("/models/{model_id}")
def get_model(request: Request, model_id: str) -> dict:
    try:
        return _store(request).model_entry(model_id)
    except NotFound as exc:
        raise HTTPException(404, str(exc)) from exc


@router.post("/models/{model_id}/analyze")
def analyze(request: Request, model_id: str, body: dict = Body(...)):
    store = _store(request)
    try:
        entry = store.model_entry(model_id)
    except NotFound as exc:
        raise HTTPException(404, str(exc)) from exc

    dataset_id = body.get("dataset_id")
    if not isinstance(dataset_id, str):
        raise HTTPException(400, "dataset_id must be a string")
    selection = body.get("selection", {})
    threshold = body.get("threshold")
    if threshold is None:
        threshold = entry["default_threshold"]
    try:
        threshold = float(threshold)
    except (TypeError, ValueError):
        raise HTTPException(400, "threshold must be a number") from None

    try:
        windows = select_windows(store, dataset_id, selection)
        if len(windows) > SYNC_ANALYSIS_LIMIT:
            record = _jobs(request).submit_analysis(model_id, dataset_id, selection, threshold)
            return _json_response(
                {
                    "status": "queued",
                    "analysis_id": record["analysis_id"],
                    "window_count": len(windows),
                    "poll": f"/v1/analyses/{record['analysis_id']}",
                },
                status_code=202,
            )
        reports = run_analysis(store, model_id, dataset_id, selection, threshold)
    except MalformedRequest as exc:
        raise HTTPException(400, str(exc)) from exc
    except NotFound as exc:
        raise HTTPException(404, str(exc)) from exc
    except IncompatibleModel as exc:
        raise HTTPException(422, str(exc)) from exc
    return {
        "status": "done",
        "model_id": model_id,
        "dataset_id": dataset_id,
        "threshold": threshold,
        "reports": [r.as_dict() for r in reports],
    }


@router.get("/analyses/{analysis_id}")
def get_analysis(request: Request, analysis_id: str) -> dict:
    try:
        return _jobs(request).get_analysis(analysis_id)
    except NotFound as exc:
        raise HTTPException(404, str(exc)) from exc


# -------------------------------------------------------------------- series


@router.get("/series/{series_id}")
def get_series(
    request: Request,
    series_id: str,
    from_ns: int | None = Query(None, alias="from"),
    to_ns: int | None = Query(None, alias="to"),
    decimate: int = Query(1, ge=1),
) -> dict:
    try:
        dataset_id, series = _store(request).resolve_series(series_id)
    except NotFound as exc:
        raise HTTPException(404, str(exc)) from exc

    if from_ns is not None and to_ns is not None and from_ns >= to_ns:
        raise HTTPException(416, f"empty range: from={from_ns} is not before to={to_ns}")
    lo = series.t0 if from_ns is None else from_ns
    hi = series.t_end if to_ns is None else to_ns

    dt_ns = series.dt * 1e9
    timestamps = series.t0 + np.round(np.arange(len(series)) * dt_ns).astype(np.int64)
    mask = (timestamps >= lo) & (timestamps <= hi)
    if not np.any(mask):
        raise HTTPException(416, f"no samples in [{lo}, {hi}]")

    points = decimate_minmax(timestamps[mask], series.values[mask], decimate)
    return {
        "series_id": series_id,
        "dataset_id": dataset_id,
        "magnet_id": series.magnet_id,
        "dt": series.dt,
        "total_rows": len(series),
        "returned": len(points),
        "points": [[t, v] for t, v in points],
    }


# ----------------------------------------------------------------------- app


def create_app(
    data_dir: str | Path,
    frontend_dir: str | Path | None = None,
    start_worker: bool = True,
) -> FastAPI:
    """Build the service over a data directory, reloading any existing state."""

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        app.state.jobs.stop()

    app = FastAPI(title="quenchwatch", version=__version__, lifespan=lifespan)
    app.state.store = DataStore(data_dir)
    app.state.jobs = JobManager(app.state.store, start_worker=start_worker)
    app.include_router(router)

    if frontend_dir is None:
        candidate = Path.cwd() / "frontend" / "dist"
        frontend_dir = candidate if candidate.is_dir() else None
    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="dashboard")
    return app
