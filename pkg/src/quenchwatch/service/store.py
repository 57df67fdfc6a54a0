"""On-disk content-addressed store for datasets, jobs, models, and analyses.

Layout under the data directory:

- ``datasets/<dataset_id>/manifest.json``, ``series/*.csv``, ``events.csv``,
  ``windows.json``
- ``jobs/<job_id>.json``
- ``models/<model_id>/snapshot.json``, ``entry.json``
- ``analyses/<analysis_id>.json``

Dataset and model ids are derived from content (the normalized creation
request, the canonical snapshot bytes), so replaying a request yields the
same id and the store stays idempotent.  Manifests carry no timestamps;
reloading after a restart reproduces identical ids and tensors.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from quenchwatch.engine.snapshot import (
    ModelSnapshot,
    load_snapshot,
    model_id as snapshot_model_id,
    snapshot_to_bytes,
)
from quenchwatch.ingest.seriesio import load_events, load_series, save_events, save_series
from quenchwatch.ingest.synthetic import DESK_SCALE, DatasetSpec, generate_synthetic
from quenchwatch.ingest.windows import (
    LabeledWindow,
    NormalizationStats,
    QuenchEvent,
    extract_normal_windows,
    extract_quench_windows,
)
from quenchwatch.signals import VoltageSeries

DEFAULT_WINDOW_PARAMS = {
    "pre_s": 0.5,
    "post_s": 0.5,
    "normal_window_s": 1.0,
    "guard_s": 1.0,
    "stride_s": 0.5,
}

WINDOW_KINDS = ("all", "normal", "quench")


class MalformedRequest(ValueError):
    """The creation request is structurally invalid (HTTP 400)."""


class NotFound(KeyError):
    """The referenced dataset, series, model, job, or analysis is unknown."""


def canonical_json(doc) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _digest_id(prefix: str, payload: bytes) -> str:
    return f"{prefix}-{hashlib.sha256(payload).hexdigest()[:12]}"


def _normalize_window_params(raw) -> dict:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise MalformedRequest("window must be an object")
    params = dict(DEFAULT_WINDOW_PARAMS)
    unknown = set(raw) - set(params)
    if unknown:
        raise MalformedRequest(f"unknown window parameters: {sorted(unknown)}")
    for key, value in raw.items():
        try:
            params[key] = float(value)
        except (TypeError, ValueError):
            raise MalformedRequest(f"window.{key} must be a number") from None
    if params["pre_s"] < 0 or params["post_s"] < 0:
        raise MalformedRequest("window.pre_s and window.post_s must be >= 0")
    if params["normal_window_s"] <= 0 or params["stride_s"] <= 0:
        raise MalformedRequest("window.normal_window_s and window.stride_s must be > 0")
    if params["guard_s"] < 0:
        raise MalformedRequest("window.guard_s must be >= 0")
    return params


class DataStore:
    """Filesystem-backed registry; safe to reopen over existing state."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("datasets", "jobs", "models", "analyses"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)

    # ------------------------------------------------------------- datasets

    def _dataset_dir(self, dataset_id: str) -> Path:
        return self.root / "datasets" / dataset_id

    def create_synthetic_dataset(self, request: dict) -> tuple[dict, bool]:
        """Generate, persist, and pre-window a synthetic dataset.

        Returns (summary, created).  Replaying an identical request
        returns the stored summary with created=False.
        """
        if not isinstance(request, dict):
            raise MalformedRequest("request body must be an object")
        tier = request.get("tier")
        if tier not in ("small", "medium", "large"):
            raise MalformedRequest(f"tier must be small, medium, or large, got {tier!r}")
        try:
            seed = int(request.get("seed", 0))
            scale = float(request.get("scale", DESK_SCALE))
            quench_rate = float(request.get("quench_rate", 1.0))
        except (TypeError, ValueError):
            raise MalformedRequest("seed, scale, and quench_rate must be numbers") from None
        series_count = request.get("series_count")
        if series_count is not None:
            try:
                series_count = int(series_count)
            except (TypeError, ValueError):
                raise MalformedRequest("series_count must be an integer") from None
        window = _normalize_window_params(request.get("window"))

        normalized = {
            "kind": "synthetic",
            "tier": tier,
            "seed": seed,
            "scale": scale,
            "series_count": series_count,
            "quench_rate": quench_rate,
            "window": window,
        }
        dataset_id = _digest_id("ds", canonical_json(normalized))
        existing = self._dataset_dir(dataset_id)
        if existing.exists():
            return self.dataset_summary(dataset_id), False

        try:
            spec = DatasetSpec.for_tier(
                tier, scale=scale, series_count=series_count, quench_rate=quench_rate
            )
        except ValueError as exc:
            raise MalformedRequest(str(exc)) from exc
        series_list, events = generate_synthetic(spec, seed)
        return self._persist_dataset(dataset_id, normalized, series_list, events, window), True

    def create_manifest_dataset(self, request: dict) -> tuple[dict, bool]:
        """Register existing CSV files as a dataset (copied into the store)."""
        if not isinstance(request, dict):
            raise MalformedRequest("request body must be an object")
        paths = request.get("series_paths")
        if not isinstance(paths, list) or not paths or not all(isinstance(p, str) for p in paths):
            raise MalformedRequest("series_paths must be a non-empty list of paths")
        events_path = request.get("events_path")
        if events_path is not None and not isinstance(events_path, str):
            raise MalformedRequest("events_path must be a path")
        window = _normalize_window_params(request.get("window"))

        digests = []
        series_list: list[VoltageSeries] = []
        seen_ids: set[str] = set()
        for p in paths:
            path = Path(p)
            if not path.exists():
                raise MalformedRequest(f"series file not found: {p}")
            series = load_series(path)
            if series.magnet_id in seen_ids:
                raise MalformedRequest(f"duplicate magnet_id {series.magnet_id!r} in manifest")
            seen_ids.add(series.magnet_id)
            series_list.append(series)
            digests.append(
                {"magnet_id": series.magnet_id, "sha256": hashlib.sha256(path.read_bytes()).hexdigest()}
            )
        events: list[QuenchEvent] = []
        events_digest = None
        if events_path is not None:
            epath = Path(events_path)
            if not epath.exists():
                raise MalformedRequest(f"events file not found: {events_path}")
            events = load_events(epath)
            events_digest = hashlib.sha256(epath.read_bytes()).hexdigest()

        normalized = {
            "kind": "manifest",
            "series": sorted(digests, key=lambda d: d["magnet_id"]),
            "events_sha256": events_digest,
            "window": window,
        }
        dataset_id = _digest_id("ds", canonical_json(normalized))
        if self._dataset_dir(dataset_id).exists():
            return self.dataset_summary(dataset_id), False
        return self._persist_dataset(dataset_id, normalized, series_list, events, window), True

    def _persist_dataset(
        self,
        dataset_id: str,
        normalized_request: dict,
        series_list: list[VoltageSeries],
        events: list[QuenchEvent],
        window: dict,
    ) -> dict:
        root = self._dataset_dir(dataset_id)
        series_dir = root / "series"
        series_dir.mkdir(parents=True, exist_ok=True)

        series_meta = []
        byte_total = 0
        for series in series_list:
            path = series_dir / f"{series.magnet_id}.csv"
            nbytes = save_series(series, path)
            byte_total += nbytes
            series_meta.append(
                {
                    "magnet_id": series.magnet_id,
                    "path": f"series/{series.magnet_id}.csv",
                    "rows": len(series),
                    "bytes": nbytes,
                    "t0": series.t0,
                    "dt": series.dt,
                    "circuit_class": series.circuit_class,
                }
            )
        save_events(events, root / "events.csv")

        window_entries, window_counts = self._extract_windows(series_list, events, window)
        (root / "windows.json").write_bytes(canonical_json(window_entries))

        manifest = {
            "dataset_id": dataset_id,
            "kind": normalized_request["kind"],
            "request": normalized_request,
            "series": series_meta,
            "events_path": "events.csv",
            "event_count": len(events),
            "byte_total": byte_total,
            "window_params": window,
            "window_counts": window_counts,
        }
        (root / "manifest.json").write_bytes(canonical_json(manifest))
        return self.dataset_summary(dataset_id)

    @staticmethod
    def _extract_windows(
        series_list: list[VoltageSeries], events: list[QuenchEvent], window: dict
    ) -> tuple[list[dict], dict]:
        entries: list[dict] = []
        counts = {"quench": 0, "normal": 0}
        for series in series_list:
            own_events = [e for e in events if e.magnet_id == series.magnet_id]
            dt_ns = series.dt * 1e9
            for w in extract_quench_windows(
                series, own_events, pre_s=window["pre_s"], post_s=window["post_s"]
            ):
                lo = round((w.series_slice.t0 - series.t0) / dt_ns)
                entries.append(
                    {
                        "magnet_id": series.magnet_id,
                        "lo": int(lo),
                        "count": len(w.series_slice),
                        "contains_quench": True,
                        "t_event_offset": w.t_event_offset,
                        "clamped": w.clamped,
                    }
                )
                counts["quench"] += 1
            for w in extract_normal_windows(
                series,
                own_events,
                window_s=window["normal_window_s"],
                guard_s=window["guard_s"],
                stride_s=window["stride_s"],
            ):
                lo = round((w.series_slice.t0 - series.t0) / dt_ns)
                entries.append(
                    {
                        "magnet_id": series.magnet_id,
                        "lo": int(lo),
                        "count": len(w.series_slice),
                        "contains_quench": False,
                        "t_event_offset": None,
                        "clamped": False,
                    }
                )
                counts["normal"] += 1
        return entries, counts

    def _manifest(self, dataset_id: str) -> dict:
        path = self._dataset_dir(dataset_id) / "manifest.json"
        if not path.exists():
            raise NotFound(f"no dataset {dataset_id}")
        return json.loads(path.read_bytes())

    def dataset_summary(self, dataset_id: str) -> dict:
        m = self._manifest(dataset_id)
        return {
            "dataset_id": m["dataset_id"],
            "kind": m["kind"],
            "tier": m["request"].get("tier"),
            "seed": m["request"].get("seed"),
            "series_count": len(m["series"]),
            "event_count": m["event_count"],
            "byte_total": m["byte_total"],
            "window_params": m["window_params"],
            "window_counts": m["window_counts"],
            "series_ids": [f"{dataset_id}:{s['magnet_id']}" for s in m["series"]],
        }

    def list_datasets(self) -> list[dict]:
        out = []
        for d in sorted((self.root / "datasets").iterdir()):
            if (d / "manifest.json").exists():
                out.append(self.dataset_summary(d.name))
        return out

    def load_series(self, dataset_id: str, magnet_id: str) -> VoltageSeries:
        m = self._manifest(dataset_id)
        for s in m["series"]:
            if s["magnet_id"] == magnet_id:
                return load_series(self._dataset_dir(dataset_id) / s["path"])
        raise NotFound(f"no series {magnet_id} in dataset {dataset_id}")

    def load_all_series(self, dataset_id: str) -> dict[str, VoltageSeries]:
        m = self._manifest(dataset_id)
        return {
            s["magnet_id"]: load_series(self._dataset_dir(dataset_id) / s["path"])
            for s in m["series"]
        }

    def dataset_windows(
        self,
        dataset_id: str,
        kind: str = "all",
        window_ids: list[str] | None = None,
    ) -> list[LabeledWindow]:
        """Rebuild the pre-extracted windows, optionally filtered."""
        if kind not in WINDOW_KINDS:
            raise MalformedRequest(f"kind must be one of {WINDOW_KINDS}, got {kind!r}")
        entries = json.loads((self._dataset_dir(dataset_id) / "windows.json").read_bytes())
        series_by_id = self.load_all_series(dataset_id)
        windows: list[LabeledWindow] = []
        for e in entries:
            if kind == "normal" and e["contains_quench"]:
                continue
            if kind == "quench" and not e["contains_quench"]:
                continue
            series = series_by_id[e["magnet_id"]]
            w = LabeledWindow(
                series_slice=series.slice(e["lo"], e["lo"] + e["count"]),
                contains_quench=e["contains_quench"],
                t_event_offset=e["t_event_offset"],
                clamped=e["clamped"],
            )
            windows.append(w)
        if window_ids is not None:
            wanted = set(window_ids)
            windows = [w for w in windows if w.window_id in wanted]
            missing = wanted - {w.window_id for w in windows}
            if missing:
                raise NotFound(f"unknown window ids: {sorted(missing)}")
        return windows

    # --------------------------------------------------------------- models

    def register_model(
        self,
        snapshot: ModelSnapshot,
        source_job_id: str | None,
        training_stats: NormalizationStats,
        default_threshold: float,
    ) -> str:
        mid = snapshot_model_id(snapshot)
        mdir = self.root / "models" / mid
        if not mdir.exists():
            mdir.mkdir(parents=True)
            (mdir / "snapshot.json").write_bytes(snapshot_to_bytes(snapshot))
            entry = {
                "model_id": mid,
                "snapshot_ref": "snapshot.json",
                "source_job_id": source_job_id,
                "training_stats": {
                    "mean": training_stats.mean,
                    "std": training_stats.std,
                    "degenerate": training_stats.degenerate,
                },
                "default_threshold": default_threshold,
            }
            (mdir / "entry.json").write_bytes(canonical_json(entry))
        return mid

    def model_entry(self, model_id: str) -> dict:
        path = self.root / "models" / model_id / "entry.json"
        if not path.exists():
            raise NotFound(f"no model {model_id}")
        return json.loads(path.read_bytes())

    def model_stats(self, model_id: str) -> NormalizationStats:
        raw = self.model_entry(model_id)["training_stats"]
        return NormalizationStats(
            mean=float(raw["mean"]), std=float(raw["std"]), degenerate=bool(raw["degenerate"])
        )

    def load_model(self, model_id: str) -> ModelSnapshot:
        entry = self.model_entry(model_id)
        return load_snapshot(self.root / "models" / model_id / entry["snapshot_ref"])

    def list_models(self) -> list[dict]:
        out = []
        for d in sorted((self.root / "models").iterdir()):
            if (d / "entry.json").exists():
                out.append(self.model_entry(d.name))
        return out

    # ----------------------------------------------------------------- jobs

    def save_job(self, record: dict) -> None:
        path = self.root / "jobs" / f"{record['job_id']}.json"
        path.write_bytes(canonical_json(record))

    def load_jobs(self) -> dict[str, dict]:
        jobs = {}
        for path in sorted((self.root / "jobs").glob("*.json")):
            record = json.loads(path.read_bytes())
            jobs[record["job_id"]] = record
        return jobs

    # ------------------------------------------------------------- analyses

    def save_analysis(self, record: dict) -> None:
        path = self.root / "analyses" / f"{record['analysis_id']}.json"
        path.write_bytes(canonical_json(record))

    def load_analyses(self) -> dict[str, dict]:
        out = {}
        for path in sorted((self.root / "analyses").glob("*.json")):
            record = json.loads(path.read_bytes())
            out[record["analysis_id"]] = record
        return out

    # ---------------------------------------------------------------- series

    def resolve_series(self, series_id: str) -> tuple[str, VoltageSeries]:
        """A series id is ``<dataset_id>:<magnet_id>``."""
        dataset_id, sep, magnet_id = series_id.partition(":")
        if not sep:
            raise NotFound(f"series id must look like <dataset_id>:<magnet_id>, got {series_id!r}")
        return dataset_id, self.load_series(dataset_id, magnet_id)


def decimate_minmax(
    timestamps: np.ndarray, values: np.ndarray, every: int
) -> list[tuple[int, float]]:
    """Bucketed decimation keeping each bucket's extremes.

    Buckets are ``every`` consecutive samples; each emits its minimum and
    maximum (one point when they coincide) in time order, so spikes survive
    any decimation factor.  ``every=1`` returns the exact samples.
    """
    if every < 1:
        raise ValueError(f"decimate must be >= 1, got {every}")
    n = len(values)
    if every == 1:
        return [(int(t), float(v)) for t, v in zip(timestamps, values)]
    points: list[tuple[int, float]] = []
    for start in range(0, n, every):
        chunk = values[start:start + every]
        lo = int(np.argmin(chunk)) + start
        hi = int(np.argmax(chunk)) + start
        first, second = sorted((lo, hi))
        points.append((int(timestamps[first]), float(values[first])))
        if second != first:
            points.append((int(timestamps[second]), float(values[second])))
    return points
