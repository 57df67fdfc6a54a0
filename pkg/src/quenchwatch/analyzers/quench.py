"""Next-step prediction residuals as a quench risk signal.

Each window is turned into overlapping input slices of the model's input
width; the model predicts every next sample and the absolute prediction
error becomes the risk score.  A window whose peak residual exceeds the
threshold is flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from quenchwatch.analyzers.base import AnalyzerResult, register
from quenchwatch.engine.snapshot import ModelSnapshot
from quenchwatch.ingest.windows import LabeledWindow, NormalizationStats


class IncompatibleModel(ValueError):
    """The window is too short for the model's input width."""


@dataclass(frozen=True)
class QuenchRiskReport:
    """Per-window verdict; flagged exactly when the peak exceeds the threshold."""

    window_id: str
    residual_series: np.ndarray
    peak_residual: float
    threshold: float
    flagged: bool

    def __post_init__(self):
        if self.flagged != (self.peak_residual > self.threshold):
            raise ValueError(
                f"flagged={self.flagged} contradicts peak {self.peak_residual} "
                f"vs threshold {self.threshold}"
            )

    def as_dict(self) -> dict:
        """JSON-ready form with stable field names."""
        return {
            "window_id": self.window_id,
            "residual_series": [float(r) for r in self.residual_series],
            "peak_residual": float(self.peak_residual),
            "threshold": float(self.threshold),
            "flagged": bool(self.flagged),
        }

    def as_result(self) -> AnalyzerResult:
        return AnalyzerResult(
            kind="prediction",
            scores=[float(r) for r in self.residual_series],
            metadata={
                "analyzer": "quench-prediction",
                "window_id": self.window_id,
                "peak_residual": float(self.peak_residual),
                "threshold": float(self.threshold),
                "flagged": bool(self.flagged),
            },
        )


def window_to_sequence(values: np.ndarray, input_window: int) -> tuple[np.ndarray, np.ndarray]:
    """Next-step embedding: inputs are trailing slices, targets the next sample.

    For n samples and width w this yields n − w (input, target) steps, so
    the values must hold at least w + 1 samples.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    n = v.shape[0]
    if v.ndim != 1:
        raise ValueError(f"values must be 1-D, got shape {v.shape}")
    if input_window < 1:
        raise ValueError(f"input_window must be at least 1, got {input_window}")
    if n < input_window + 1:
        raise IncompatibleModel(
            f"{n} samples cannot feed an input width of {input_window}; need at least {input_window + 1}"
        )
    xs = sliding_window_view(v, input_window)[: n - input_window]
    targets = v[input_window:]
    return np.ascontiguousarray(xs), targets


def lstm_analyze(
    windows: list[LabeledWindow],
    model: ModelSnapshot,
    threshold: float,
    stats: NormalizationStats | None = None,
) -> list[QuenchRiskReport]:
    """Score windows by next-step prediction error, in volts.

    The model predicts in its training scale.  When ``stats`` is given the
    raw window is z-scored with them before prediction and the residuals
    are scaled back by the std, so scores are volts either way; without
    stats the windows must already be in the model's scale.
    """
    if model.head.output_size != 1:
        raise IncompatibleModel(
            f"next-step prediction needs a single output, model has {model.head.output_size}"
        )
    w = model.hyperparameters.input_window
    reports: list[QuenchRiskReport] = []
    for window in windows:
        raw = window.series_slice.values
        if stats is not None and not stats.degenerate:
            values = (raw - stats.mean) / stats.std
            scale = stats.std
        else:
            values = raw
            scale = 1.0
        xs, targets = window_to_sequence(values, w)
        predictions = model.predict(xs)[:, 0]
        residuals = np.abs(predictions - targets) * scale
        peak = float(residuals.max())
        reports.append(
            QuenchRiskReport(
                window_id=window.window_id,
                residual_series=residuals,
                peak_residual=peak,
                threshold=float(threshold),
                flagged=peak > float(threshold),
            )
        )
    return reports


@register("quench-prediction")
def _quench_prediction_analyzer(
    windows: list[LabeledWindow],
    model: ModelSnapshot,
    threshold: float,
    stats: NormalizationStats | None = None,
) -> list[AnalyzerResult]:
    """Registry adapter: one prediction result per window."""
    return [report.as_result() for report in lstm_analyze(windows, model, threshold, stats)]
