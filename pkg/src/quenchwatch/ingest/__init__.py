"""Data handling: CSV ingestion, quench-window extraction, and synthetic datasets."""

from quenchwatch.ingest.seriesio import (
    EmptyFile,
    NonUniformSampling,
    ParseError,
    load_events,
    load_series,
    save_events,
    save_series,
    serialize_series,
)
from quenchwatch.ingest.synthetic import DatasetSpec, GeneratorConfig, SpecInfeasible, generate_synthetic
from quenchwatch.ingest.windows import (
    LabeledWindow,
    NormalizationStats,
    QuenchEvent,
    extract_normal_windows,
    extract_quench_windows,
    normalize,
)

__all__ = [
    "ParseError",
    "NonUniformSampling",
    "EmptyFile",
    "load_series",
    "save_series",
    "serialize_series",
    "load_events",
    "save_events",
    "QuenchEvent",
    "LabeledWindow",
    "NormalizationStats",
    "extract_quench_windows",
    "extract_normal_windows",
    "normalize",
    "DatasetSpec",
    "GeneratorConfig",
    "SpecInfeasible",
    "generate_synthetic",
]
