"""Quench-period extraction and window conditioning.

The logging database keeps long stretches of normal operation with sparse
quench events, and offers no automated way to cut the periods around an
event out of a series; these helpers supply that: labeled windows around
events, guarded sliding windows of normal operation, and z-score
normalization for model input.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from quenchwatch.signals import VoltageSeries

log = logging.getLogger(__name__)

#: Default span kept around an event, seconds before / after.  The right
#: span is an open modelling question, so both are plain parameters.
DEFAULT_PRE_S = 60.0
DEFAULT_POST_S = 10.0


@dataclass(frozen=True)
class QuenchEvent:
    """One quench occurrence on a magnet; ``t_event`` in ns since epoch."""

    magnet_id: str
    t_event: int
    label: str = "quench"


@dataclass(frozen=True)
class LabeledWindow:
    """A contiguous slice of a source series, labeled for training.

    ``t_event_offset`` is the event time relative to the window start in
    seconds, present iff ``contains_quench``.  ``clamped`` reports that the
    requested span ran past the series bounds and was cut back.
    """

    series_slice: VoltageSeries
    contains_quench: bool
    t_event_offset: float | None = None
    clamped: bool = False

    def __post_init__(self):
        if self.contains_quench:
            if self.t_event_offset is None:
                raise ValueError("quench window requires t_event_offset")
            if not (-1e-9 <= self.t_event_offset <= self.series_slice.duration + 1e-9):
                raise ValueError(
                    f"t_event_offset {self.t_event_offset} outside window duration {self.series_slice.duration}"
                )
        elif self.t_event_offset is not None:
            raise ValueError("t_event_offset only valid when contains_quench")

    @property
    def window_id(self) -> str:
        return f"{self.series_slice.magnet_id}:{self.series_slice.t0}"

    @property
    def values(self) -> np.ndarray:
        return self.series_slice.values


@dataclass(frozen=True)
class NormalizationStats:
    """z-score parameters; ``degenerate`` flags a below-floor std (identity map)."""

    mean: float
    std: float
    degenerate: bool = False


def _index_range(series: VoltageSeries, t_start_ns: int, t_end_ns: int) -> tuple[int, int]:
    """Sample indices [lo, hi] covering [t_start_ns, t_end_ns], pre-clamp."""
    dt_ns = series.dt * 1e9
    lo = math.ceil((t_start_ns - series.t0) / dt_ns - 1e-9)
    hi = math.floor((t_end_ns - series.t0) / dt_ns + 1e-9)
    return lo, hi


def extract_quench_windows(
    series: VoltageSeries,
    events: list[QuenchEvent],
    pre_s: float = DEFAULT_PRE_S,
    post_s: float = DEFAULT_POST_S,
) -> list[LabeledWindow]:
    """Cut one labeled window [t_event - pre_s, t_event + post_s] per event.

    Windows are clamped to the series bounds (flagged on the window);
    events outside the covered span are skipped with a logged report, not
    an error.
    """
    if pre_s < 0 or post_s < 0:
        raise ValueError("pre_s and post_s must be >= 0")
    windows: list[LabeledWindow] = []
    for event in events:
        if event.t_event < series.t0 or event.t_event > series.t_end:
            log.warning(
                "EventOutOfSpan: event at %d ns outside series %s span [%d, %d]; skipped",
                event.t_event,
                series.magnet_id,
                series.t0,
                series.t_end,
            )
            continue
        lo, hi = _index_range(series, event.t_event - round(pre_s * 1e9), event.t_event + round(post_s * 1e9))
        clamped = lo < 0 or hi > len(series.values) - 1
        lo = max(lo, 0)
        hi = min(hi, len(series.values) - 1)
        window_slice = series.slice(lo, hi + 1)
        offset = (event.t_event - window_slice.t0) / 1e9
        windows.append(
            LabeledWindow(
                series_slice=window_slice,
                contains_quench=True,
                t_event_offset=offset,
                clamped=clamped,
            )
        )
    return windows


def extract_normal_windows(
    series: VoltageSeries,
    events: list[QuenchEvent],
    window_s: float,
    guard_s: float,
    stride_s: float,
) -> list[LabeledWindow]:
    """Sliding windows of normal operation, skipping event neighbourhoods.

    A window [start, start + window_s] is dropped when it intersects
    [t_event - guard_s, t_event + guard_s] for any event.  stride_s < window_s
    yields overlapping windows.
    """
    if window_s <= 0:
        raise ValueError("window_s must be > 0")
    if stride_s <= 0:
        raise ValueError("stride_s must be > 0")
    duration = series.duration
    if window_s > duration:
        return []
    guards = [(e.t_event - round(guard_s * 1e9), e.t_event + round(guard_s * 1e9)) for e in events]
    windows: list[LabeledWindow] = []
    k_max = math.floor((duration - window_s) / stride_s + 1e-9)
    for k in range(k_max + 1):
        start_ns = series.t0 + round(k * stride_s * 1e9)
        end_ns = start_ns + round(window_s * 1e9)
        if any(start_ns <= g_hi and end_ns >= g_lo for g_lo, g_hi in guards):
            continue
        lo, hi = _index_range(series, start_ns, end_ns)
        lo = max(lo, 0)
        hi = min(hi, len(series.values) - 1)
        if hi < lo:
            continue
        windows.append(LabeledWindow(series_slice=series.slice(lo, hi + 1), contains_quench=False))
    return windows


def normalize(
    window: LabeledWindow,
    stats: NormalizationStats | None = None,
) -> tuple[LabeledWindow, NormalizationStats]:
    """z-score a window's samples; returns the transformed window and the stats.

    Without supplied stats they are computed from this window (population
    std) and returned for reuse on other splits.  A below-floor std makes
    the transform the identity, flagged on the returned stats.
    """
    values = window.series_slice.values
    if stats is None:
        mean = float(np.mean(values))
        std = float(np.std(values))
        degenerate = std < 1e-12 * max(1.0, abs(mean))
        stats = NormalizationStats(mean=mean, std=std, degenerate=degenerate)
    if stats.degenerate:
        return window, stats
    transformed = (values - stats.mean) / stats.std
    new_slice = replace(window.series_slice, values=transformed)
    return replace(window, series_slice=new_slice), stats
