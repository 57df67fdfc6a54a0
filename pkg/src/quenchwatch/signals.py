"""Voltage-series domain types and the statistical feature extractors.

A :class:`VoltageSeries` is a uniformly sampled residual-voltage signal for
one magnet.  :func:`extract_features` computes the seven per-signal
statistics used throughout the analyzers (mean, min, max, skewness, excess
kurtosis, OLS slope against sample index, and the slope's standard error).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "VoltageSeries",
    "FeatureVector",
    "Violation",
    "EmptySeries",
    "extract_features",
    "validate_series",
    "variance_floor",
]


class EmptySeries(ValueError):
    """Raised when an operation needs samples and the series has none."""


@dataclass(frozen=True)
class VoltageSeries:
    """Uniformly sampled voltage signal with magnet metadata.

    ``t0`` is the timestamp of the first sample in nanoseconds since epoch,
    ``dt`` the sampling interval in seconds.  Samples are stored as a
    read-only float64 array; the covered duration is exactly
    ``(len(values) - 1) * dt`` — there is no implicit resampling.

    Construction does not reject bad data; run :func:`validate_series` to
    get the list of invariant violations (an empty list means valid).
    """

    magnet_id: str
    circuit_class: str
    t0: int
    dt: float
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        arr = np.array(arr, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "t0", int(self.t0))
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def duration(self) -> float:
        """Covered time span in seconds: (n - 1) * dt."""
        if len(self.values) == 0:
            return 0.0
        return (len(self.values) - 1) * self.dt

    @property
    def t_end(self) -> int:
        """Timestamp of the last sample, ns since epoch."""
        if len(self.values) == 0:
            return self.t0
        return self.t0 + round((len(self.values) - 1) * self.dt * 1e9)

    def sample_time(self, index: int) -> int:
        """Timestamp of sample ``index`` in ns since epoch."""
        return self.t0 + round(index * self.dt * 1e9)

    def slice(self, start: int, stop: int) -> "VoltageSeries":
        """Contiguous sub-series over sample indices [start, stop)."""
        if not (0 <= start < stop <= len(self.values)):
            raise IndexError(f"slice [{start}, {stop}) out of range for {len(self.values)} samples")
        return VoltageSeries(
            magnet_id=self.magnet_id,
            circuit_class=self.circuit_class,
            t0=self.sample_time(start),
            dt=self.dt,
            values=self.values[start:stop],
        )


@dataclass(frozen=True)
class Violation:
    """One broken series invariant; ``index`` points at the offending sample."""

    kind: str
    index: int | None = None
    message: str = ""

    def __str__(self) -> str:
        if self.index is None:
            return f"{self.kind}: {self.message}" if self.message else self.kind
        return f"{self.kind}({self.index}): {self.message}" if self.message else f"{self.kind}({self.index})"


def validate_series(series: VoltageSeries) -> list[Violation]:
    """Check all series invariants; returns an empty list iff the series is valid.

    Total function: never raises, reports every violation it finds.
    """
    violations: list[Violation] = []
    if len(series.values) == 0:
        violations.append(Violation("EmptySeries", message="series has no samples"))
    if not (series.dt > 0):
        violations.append(Violation("NonPositiveDt", message=f"dt={series.dt!r}"))
    finite = np.isfinite(series.values)
    if not finite.all():
        for i in np.nonzero(~finite)[0]:
            violations.append(Violation("NonFiniteSample", index=int(i), message=f"value={series.values[i]!r}"))
    return violations


@dataclass(frozen=True)
class FeatureVector:
    """The seven per-signal statistics.

    Kurtosis is reported as excess kurtosis (normal distribution -> 0).
    ``slope`` and ``stderr`` come from ordinary least squares of the sample
    values against the sample index 0..n-1, so the slope unit is
    volts per sample.  Constant (degenerate-variance) series report
    skewness = kurtosis = slope = stderr = 0 so downstream feature vectors
    stay finite.
    """

    mean: float
    min: float
    max: float
    skewness: float
    kurtosis: float
    slope: float
    stderr: float
    degenerate: bool = field(default=False, compare=False)

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.mean, self.min, self.max, self.skewness, self.kurtosis, self.slope, self.stderr],
            dtype=np.float64,
        )


def variance_floor(mean: float) -> float:
    """Variance below this counts as degenerate (constant series)."""
    return 1e-12 * max(1.0, mean * mean)


def extract_features(series: VoltageSeries | Sequence[float] | np.ndarray) -> FeatureVector:
    """Compute the seven signal statistics for one series.

    Accepts a :class:`VoltageSeries` or any sample sequence.  Skewness is
    m3 / m2^1.5 and kurtosis m4 / m2^2 - 3 with population central moments;
    both are defined as 0 when the variance is below the degenerate floor.
    A single-sample series has no regression and also falls back to
    slope = stderr = 0.

    Raises EmptySeries when there are no samples.
    """
    if isinstance(series, VoltageSeries):
        x = series.values
    else:
        x = np.asarray(series, dtype=np.float64)
    n = len(x)
    if n == 0:
        raise EmptySeries("cannot extract features from an empty series")

    mean = float(np.mean(x))
    lo = float(np.min(x))
    hi = float(np.max(x))

    d = x - mean
    m2 = float(np.mean(d * d))
    degenerate = m2 < variance_floor(mean)
    if degenerate:
        skewness = 0.0
        kurtosis = 0.0
    else:
        m3 = float(np.mean(d ** 3))
        m4 = float(np.mean(d ** 4))
        skewness = m3 / m2 ** 1.5
        kurtosis = m4 / (m2 * m2) - 3.0

    if n < 2 or degenerate:
        slope = 0.0
        stderr = 0.0
    else:
        t = np.arange(n, dtype=np.float64)
        t_mean = float(np.mean(t))
        tt = t - t_mean
        sxx = float(np.dot(tt, tt))
        slope = float(np.dot(tt, d)) / sxx
        if n == 2:
            stderr = 0.0
        else:
            resid = d - slope * tt
            ssr = max(float(np.dot(resid, resid)), 0.0)
            stderr = float(np.sqrt(ssr / (n - 2) / sxx))

    return FeatureVector(
        mean=mean,
        min=lo,
        max=hi,
        skewness=skewness,
        kurtosis=kurtosis,
        slope=slope,
        stderr=stderr,
        degenerate=degenerate,
    )
