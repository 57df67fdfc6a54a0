"""Clustering and prediction analyses behind one registry."""

from quenchwatch.analyzers.base import (
    AnalyzerResult,
    available_analyzers,
    get_analyzer,
    register,
)
from quenchwatch.analyzers.clustering import KTooLarge, dbscan, kmeans
from quenchwatch.analyzers.quench import (
    IncompatibleModel,
    QuenchRiskReport,
    lstm_analyze,
    window_to_sequence,
)

__all__ = [
    "AnalyzerResult",
    "available_analyzers",
    "get_analyzer",
    "register",
    "KTooLarge",
    "kmeans",
    "dbscan",
    "IncompatibleModel",
    "QuenchRiskReport",
    "lstm_analyze",
    "window_to_sequence",
]
