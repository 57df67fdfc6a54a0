"""Deterministic synthetic voltage datasets in three size tiers.

The tiers mirror the 22 MB / 111 MB / 5000 MB training sets of the original
study, scaled down by a configurable desk-scale factor (default 1:1000).
Baselines are smooth drift plus band-limited noise; quench transients are
injected as rapid resistive-voltage growth segments.  Everything is a pure
function of (spec, seed): the same pair reproduces byte-identical CSVs.

The transient shape is synthetic by construction — flat baseline, an
exponential rise over 50..500 ms, then an exponential decay — with per-event
parameters drawn inside the bounds documented on :class:`GeneratorConfig`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from quenchwatch.ingest.seriesio import SERIES_HEADER, serialize_series
from quenchwatch.ingest.windows import QuenchEvent
from quenchwatch.signals import VoltageSeries

#: Published tier sizes in bytes (megabytes of the original study).
TIER_BYTES = {"small": 22_000_000, "medium": 111_000_000, "large": 5_000_000_000}

#: Default desk-scale factor applied to the published tier sizes.
DESK_SCALE = 1e-3

_TIER_SERIES_COUNT = {"small": 2, "medium": 3, "large": 5}

Tier = Literal["small", "medium", "large"]


class SpecInfeasible(ValueError):
    """The requested dataset cannot be generated (e.g. too many events to fit)."""


@dataclass(frozen=True)
class DatasetSpec:
    """What to generate: tier, serialized size target, and event density."""

    tier: Tier
    target_bytes: int
    series_count: int
    quench_rate: float = 1.0

    def __post_init__(self):
        if self.tier not in TIER_BYTES:
            raise ValueError(f"unknown tier {self.tier!r}")
        if self.target_bytes <= 0:
            raise ValueError("target_bytes must be > 0")
        if self.series_count <= 0:
            raise ValueError("series_count must be > 0")
        if self.quench_rate < 0:
            raise ValueError("quench_rate must be >= 0")

    @classmethod
    def for_tier(
        cls,
        tier: Tier,
        scale: float = DESK_SCALE,
        series_count: int | None = None,
        quench_rate: float = 1.0,
    ) -> "DatasetSpec":
        """Spec for a published tier scaled by ``scale`` (1.0 = full size)."""
        if tier not in TIER_BYTES:
            raise ValueError(f"unknown tier {tier!r}")
        if scale <= 0:
            raise ValueError("scale must be > 0")
        return cls(
            tier=tier,
            target_bytes=round(TIER_BYTES[tier] * scale),
            series_count=series_count if series_count is not None else _TIER_SERIES_COUNT[tier],
            quench_rate=quench_rate,
        )


@dataclass(frozen=True)
class GeneratorConfig:
    """Waveform knobs for the synthetic baseline and transients.

    Rise times stay within [0.05, 0.5] s; amplitudes and decay constants are
    drawn uniformly from the given bounds.  dt should be expressible as an
    integer nanosecond count so CSV timestamps stay exactly uniform.
    """

    dt: float = 0.02
    t0_base: int = 1_600_000_000_000_000_000
    t0_series_step: int = 1_000_000_000_000
    drift_amplitude: float = 0.01
    noise_sigma: float = 0.002
    noise_cutoff_fraction: float = 0.05
    quench_amplitude: tuple[float, float] = (0.5, 2.0)
    quench_rise_s: tuple[float, float] = (0.05, 0.5)
    quench_decay_s: tuple[float, float] = (0.2, 1.0)
    circuit_class: str = "600A"
    magnet_prefix: str = "Q600A"


def _band_limited_noise(rng: np.random.Generator, n: int, sigma: float, cutoff_fraction: float) -> np.ndarray:
    """Gaussian noise low-passed by zeroing rFFT bins above the cutoff."""
    white = rng.normal(0.0, 1.0, n)
    if n < 8:
        return sigma * white
    spectrum = np.fft.rfft(white)
    keep = max(2, int(len(spectrum) * cutoff_fraction))
    spectrum[keep:] = 0.0
    shaped = np.fft.irfft(spectrum, n)
    std = shaped.std()
    if std > 0:
        shaped *= sigma / std
    return shaped


def _baseline(rng: np.random.Generator, n: int, dt: float, cfg: GeneratorConfig) -> np.ndarray:
    t = np.arange(n) * dt
    duration = max(n * dt, dt)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    period = duration / rng.uniform(1.0, 3.0)
    drift = cfg.drift_amplitude * np.sin(2.0 * np.pi * t / period + phase)
    drift += rng.uniform(-0.5, 0.5) * cfg.drift_amplitude / duration * t
    return drift + _band_limited_noise(rng, n, cfg.noise_sigma, cfg.noise_cutoff_fraction)


def _transient(n: int, dt: float, onset_idx: int, amplitude: float, rise_s: float, decay_s: float) -> np.ndarray:
    """Resistive-growth burst: exponential rise to the peak, then decay."""
    t = np.arange(n) * dt
    t_on = onset_idx * dt
    shape = np.zeros(n)
    rising = (t >= t_on) & (t <= t_on + rise_s)
    # normalized exponential ramp, 0 at onset and 1 at the peak
    k = 4.0
    shape[rising] = (np.exp(k * (t[rising] - t_on) / rise_s) - 1.0) / (np.exp(k) - 1.0)
    falling = t > t_on + rise_s
    shape[falling] = np.exp(-(t[falling] - t_on - rise_s) / decay_s)
    return amplitude * shape


def _event_count(rng: np.random.Generator, rate: float) -> int:
    base = int(rate)
    frac = rate - base
    return base + (1 if rng.random() < frac else 0)


def generate_synthetic(
    spec: DatasetSpec,
    seed: int,
    cfg: GeneratorConfig = GeneratorConfig(),
) -> tuple[list[VoltageSeries], list[QuenchEvent]]:
    """Generate the dataset described by ``spec``, deterministically from ``seed``.

    The summed serialized CSV size lands within a few percent of
    ``spec.target_bytes`` (a trial serialization calibrates bytes per row).
    Raises SpecInfeasible when the requested events cannot fit into the
    series with non-overlapping transients.
    """
    target_per_series = spec.target_bytes / spec.series_count
    header_bytes = len(SERIES_HEADER) + 1
    all_series: list[VoltageSeries] = []
    all_events: list[QuenchEvent] = []

    for idx in range(spec.series_count):
        magnet_id = f"{cfg.magnet_prefix}.{idx:03d}"
        t0 = cfg.t0_base + idx * cfg.t0_series_step
        series_rng = np.random.default_rng(np.random.PCG64(seed).jumped(idx + 1))

        n = max(64, round(target_per_series / 40.0))
        series = _generate_one(series_rng, magnet_id, t0, n, spec, cfg)
        bytes_per_row = (len(serialize_series(series)) - header_bytes) / n

        n = max(64, round(target_per_series / bytes_per_row))
        series_rng = np.random.default_rng(np.random.PCG64(seed).jumped(idx + 1))
        series, events = _generate_one(series_rng, magnet_id, t0, n, spec, cfg, with_events=True)

        all_series.append(series)
        all_events.extend(events)

    return all_series, all_events


def _generate_one(
    rng: np.random.Generator,
    magnet_id: str,
    t0: int,
    n: int,
    spec: DatasetSpec,
    cfg: GeneratorConfig,
    with_events: bool = False,
):
    values = _baseline(rng, n, cfg.dt, cfg)
    count = _event_count(rng, spec.quench_rate)
    duration = (n - 1) * cfg.dt

    events: list[QuenchEvent] = []
    if count > 0:
        max_rise = cfg.quench_rise_s[1]
        spacing = max_rise + cfg.quench_decay_s[1]
        usable = duration * 0.7
        if count * spacing > usable:
            raise SpecInfeasible(
                f"{count} events need {count * spacing:.2f} s of transient but only "
                f"{usable:.2f} s of the {duration:.2f} s series is usable"
            )
        onsets: list[int] = []
        attempts = 0
        spacing_idx = int(np.ceil(spacing / cfg.dt))
        lo_idx = int(0.1 * n)
        hi_idx = int(0.75 * n)
        while len(onsets) < count:
            attempts += 1
            if attempts > 1000:
                raise SpecInfeasible(f"could not place {count} non-overlapping events")
            cand = int(rng.integers(lo_idx, max(lo_idx + 1, hi_idx)))
            if all(abs(cand - o) >= spacing_idx for o in onsets):
                onsets.append(cand)
        onsets.sort()
        for onset in onsets:
            amplitude = rng.uniform(*cfg.quench_amplitude)
            rise = rng.uniform(*cfg.quench_rise_s)
            decay = rng.uniform(*cfg.quench_decay_s)
            values = values + _transient(n, cfg.dt, onset, amplitude, rise, decay)
            events.append(
                QuenchEvent(magnet_id=magnet_id, t_event=t0 + round(onset * cfg.dt * 1e9), label="quench")
            )

    series = VoltageSeries(
        magnet_id=magnet_id,
        circuit_class=cfg.circuit_class,
        t0=t0,
        dt=cfg.dt,
        values=values,
    )
    if with_events:
        return series, events
    return series
