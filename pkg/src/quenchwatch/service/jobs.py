"""Training and analysis job lifecycle.

One background worker executes jobs in submission order, which keeps loss
traces deterministic and memory bounded.  Job state lives in memory behind
a lock and is persisted to the store on every transition, so a restarted
process reloads the full history; jobs that were queued or running when
the process died are marked failed on reload.
"""

from __future__ import annotations

import hashlib
import queue
import threading
import uuid
from datetime import datetime, timezone

import numpy as np

from quenchwatch.analyzers.quench import IncompatibleModel, lstm_analyze, window_to_sequence
from quenchwatch.engine.params import Hyperparameters
from quenchwatch.engine.training import DivergenceDetected, train
from quenchwatch.ingest.windows import NormalizationStats
from quenchwatch.service.store import DataStore, MalformedRequest, NotFound, canonical_json

DEFAULT_THRESHOLD_FACTOR = 5.0
SYNC_ANALYSIS_LIMIT = 100

HP_FIELDS = ("cell_count", "layer_count", "input_window", "learning_rate", "epochs", "batch_size", "seed")
HP_INT_FIELDS = ("cell_count", "layer_count", "input_window", "epochs", "batch_size", "seed")


class TokenConflict(ValueError):
    """Same idempotency token reused with a different payload (HTTP 409)."""


def parse_hyperparameters(raw: dict) -> Hyperparameters:
    """Build Hyperparameters from JSON, rejecting unknown or non-numeric fields."""
    if not isinstance(raw, dict):
        raise MalformedRequest("hyperparameters must be an object")
    unknown = set(raw) - set(HP_FIELDS)
    if unknown:
        raise MalformedRequest(f"unknown hyperparameters: {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        try:
            if key in HP_INT_FIELDS:
                if isinstance(value, float) and not value.is_integer():
                    raise ValueError
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        except (TypeError, ValueError):
            raise MalformedRequest(f"hyperparameter {key} must be a number") from None
    try:
        return Hyperparameters(**kwargs)
    except (TypeError, ValueError) as exc:
        raise MalformedRequest(f"invalid hyperparameters: {exc}") from exc


def hyperparameters_to_dict(hp: Hyperparameters) -> dict:
    return {
        "cell_count": hp.cell_count,
        "layer_count": hp.layer_count,
        "input_window": hp.input_window,
        "learning_rate": hp.learning_rate,
        "epochs": hp.epochs,
        "batch_size": hp.batch_size,
        "seed": hp.seed,
    }


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def build_training_set(
    store: DataStore, dataset_id: str, hp: Hyperparameters, window_kind: str
) -> tuple[list, list, NormalizationStats]:
    """Windows -> normalization stats -> next-step sequences, deterministically."""
    windows = store.dataset_windows(dataset_id, kind=window_kind)
    if not windows:
        raise MalformedRequest(
            f"dataset {dataset_id} has no {window_kind!r} windows to train on"
        )
    concat = np.concatenate([w.series_slice.values for w in windows])
    mean = float(np.mean(concat))
    std = float(np.std(concat))
    degenerate = std < 1e-12 * max(1.0, abs(mean))
    stats = NormalizationStats(mean=mean, std=std, degenerate=degenerate)

    sequences = []
    for w in windows:
        values = w.series_slice.values
        if not degenerate:
            values = (values - mean) / std
        sequences.append(window_to_sequence(values, hp.input_window))
    return sequences, windows, stats


class JobManager:
    """Submission front plus the single background worker."""

    def __init__(self, store: DataStore, start_worker: bool = True):
        self._store = store
        self._lock = threading.Lock()
        self._queue: queue.Queue[str | None] = queue.Queue()
        self._jobs: dict[str, dict] = store.load_jobs()
        self._analyses: dict[str, dict] = store.load_analyses()
        self._tokens: dict[str, tuple[str, str]] = {}

        # Anything unfinished died with the previous process.
        for record in self._jobs.values():
            if record["status"] in ("queued", "running"):
                record["status"] = "failed"
                record["error"] = "interrupted by restart"
                store.save_job(record)
            token = record.get("token")
            if token:
                self._tokens[token] = (record["job_id"], record["payload_digest"])
        for record in self._analyses.values():
            if record["status"] in ("queued", "running"):
                record["status"] = "failed"
                record["error"] = "interrupted by restart"
                store.save_analysis(record)

        self._worker: threading.Thread | None = None
        if start_worker:
            self._worker = threading.Thread(target=self._work, name="quenchwatch-worker", daemon=True)
            self._worker.start()

    # ----------------------------------------------------------- submission

    def submit_training(
        self,
        dataset_id: str,
        hp_raw: dict,
        token: str | None = None,
        window_kind: str = "normal",
    ) -> tuple[dict, bool]:
        """Queue a training job; returns (record, created).

        A replay with the same token and payload returns the original job;
        the same token with a different payload raises TokenConflict.
        """
        if window_kind not in ("normal", "quench", "all"):
            raise MalformedRequest(f"window_kind must be normal, quench, or all, got {window_kind!r}")
        hp = parse_hyperparameters(hp_raw)
        self._store.dataset_summary(dataset_id)  # raises NotFound for unknown ids

        payload = {
            "dataset_id": dataset_id,
            "hyperparameters": hyperparameters_to_dict(hp),
            "window_kind": window_kind,
        }
        digest = hashlib.sha256(canonical_json(payload)).hexdigest()

        with self._lock:
            if token is not None:
                seen = self._tokens.get(token)
                if seen is not None:
                    job_id, seen_digest = seen
                    if seen_digest != digest:
                        raise TokenConflict(
                            f"token {token!r} was already used with a different payload"
                        )
                    return dict(self._jobs[job_id]), False
            job_id = f"j-{uuid.uuid4().hex[:12]}"
            record = {
                "job_id": job_id,
                "kind": "train",
                "dataset_id": dataset_id,
                "hyperparameters": payload["hyperparameters"],
                "window_kind": window_kind,
                "status": "queued",
                "trace": [],
                "created_at": _utcnow(),
                "token": token,
                "payload_digest": digest,
                "model_id": None,
                "error": None,
            }
            self._jobs[job_id] = record
            if token is not None:
                self._tokens[token] = (job_id, digest)
            self._store.save_job(record)
        self._queue.put(job_id)
        return dict(record), True

    def submit_analysis(
        self,
        model_id: str,
        dataset_id: str,
        selection: dict,
        threshold: float,
    ) -> dict:
        """Queue an asynchronous analysis (used beyond the synchronous limit)."""
        analysis_id = f"a-{uuid.uuid4().hex[:12]}"
        record = {
            "analysis_id": analysis_id,
            "model_id": model_id,
            "dataset_id": dataset_id,
            "selection": selection,
            "threshold": threshold,
            "status": "queued",
            "created_at": _utcnow(),
            "reports": None,
            "error": None,
        }
        with self._lock:
            self._analyses[analysis_id] = record
            self._store.save_analysis(record)
        self._queue.put(f"analysis:{analysis_id}")
        return dict(record)

    # -------------------------------------------------------------- reading

    def get_job(self, job_id: str) -> dict:
        with self._lock:
            record = self._jobs.get(job_id)
            if record is None:
                raise NotFound(f"no job {job_id}")
            snapshot = dict(record)
            snapshot["trace"] = list(record["trace"])
            return snapshot

    def list_jobs(self) -> list[dict]:
        with self._lock:
            return [self.get_or_copy(r) for r in sorted(self._jobs.values(), key=lambda r: r["created_at"])]

    @staticmethod
    def get_or_copy(record: dict) -> dict:
        snapshot = dict(record)
        snapshot["trace"] = list(record.get("trace", []))
        return snapshot

    def get_analysis(self, analysis_id: str) -> dict:
        with self._lock:
            record = self._analyses.get(analysis_id)
            if record is None:
                raise NotFound(f"no analysis {analysis_id}")
            return dict(record)

    # -------------------------------------------------------------- worker

    def _work(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            if item.startswith("analysis:"):
                self._run_analysis(item.split(":", 1)[1])
            else:
                self._run_training(item)

    def stop(self) -> None:
        if self._worker is not None:
            self._queue.put(None)
            self._worker.join(timeout=30)
            self._worker = None

    def run_pending_inline(self) -> None:
        """Drain the queue on the calling thread (CLI and tests)."""
        while True:
            try:
                item = self._queue.get_nowait()
            except queue.Empty:
                return
            if item is None:
                continue
            if item.startswith("analysis:"):
                self._run_analysis(item.split(":", 1)[1])
            else:
                self._run_training(item)

    def _transition(self, record: dict, status: str, **updates) -> None:
        with self._lock:
            record["status"] = status
            record.update(updates)
            if "analysis_id" in record:
                self._store.save_analysis(record)
            else:
                self._store.save_job(record)

    def _run_training(self, job_id: str) -> None:
        with self._lock:
            record = self._jobs.get(job_id)
        if record is None or record["status"] != "queued":
            return
        self._transition(record, "running")
        try:
            hp = parse_hyperparameters(record["hyperparameters"])
            sequences, windows, stats = build_training_set(
                self._store, record["dataset_id"], hp, record["window_kind"]
            )

            def progress(_epoch: int, loss: float) -> None:
                with self._lock:
                    record["trace"].append(loss)
                    self._store.save_job(record)

            snapshot, _trace = train(sequences, hp, progress=progress)

            reports = lstm_analyze(windows, snapshot, threshold=0.0, stats=stats)
            residuals = np.concatenate([r.residual_series for r in reports])
            default_threshold = DEFAULT_THRESHOLD_FACTOR * float(np.median(residuals))

            model_id = self._store.register_model(snapshot, job_id, stats, default_threshold)
            self._transition(record, "done", model_id=model_id, default_threshold=default_threshold)
        except DivergenceDetected as exc:
            self._transition(record, "failed", error=str(exc))
        except (MalformedRequest, NotFound, IncompatibleModel, ValueError) as exc:
            self._transition(record, "failed", error=str(exc))
        except Exception as exc:  # a worker thread must never die silently
            self._transition(record, "failed", error=f"internal error: {exc}")

    def _run_analysis(self, analysis_id: str) -> None:
        with self._lock:
            record = self._analyses.get(analysis_id)
        if record is None or record["status"] != "queued":
            return
        self._transition(record, "running")
        try:
            reports = run_analysis(
                self._store,
                record["model_id"],
                record["dataset_id"],
                record["selection"],
                record["threshold"],
            )
            self._transition(record, "done", reports=[r.as_dict() for r in reports])
        except (MalformedRequest, NotFound, IncompatibleModel, ValueError) as exc:
            self._transition(record, "failed", error=str(exc))
        except Exception as exc:
            self._transition(record, "failed", error=f"internal error: {exc}")


def select_windows(store: DataStore, dataset_id: str, selection: dict) -> list:
    """Resolve a window selection {kind?, window_ids?, limit?} to windows."""
    if not isinstance(selection, dict):
        raise MalformedRequest("selection must be an object")
    unknown = set(selection) - {"kind", "window_ids", "limit"}
    if unknown:
        raise MalformedRequest(f"unknown selection fields: {sorted(unknown)}")
    kind = selection.get("kind", "all")
    window_ids = selection.get("window_ids")
    if window_ids is not None and (
        not isinstance(window_ids, list) or not all(isinstance(w, str) for w in window_ids)
    ):
        raise MalformedRequest("selection.window_ids must be a list of strings")
    windows = store.dataset_windows(dataset_id, kind=kind, window_ids=window_ids)
    limit = selection.get("limit")
    if limit is not None:
        try:
            limit = int(limit)
        except (TypeError, ValueError):
            raise MalformedRequest("selection.limit must be an integer") from None
        if limit < 0:
            raise MalformedRequest("selection.limit must be >= 0")
        windows = windows[:limit]
    return windows


def run_analysis(
    store: DataStore, model_id: str, dataset_id: str, selection: dict, threshold: float
) -> list:
    model = store.load_model(model_id)
    stats = store.model_stats(model_id)
    windows = select_windows(store, dataset_id, selection)
    return lstm_analyze(windows, model, threshold, stats=stats)
