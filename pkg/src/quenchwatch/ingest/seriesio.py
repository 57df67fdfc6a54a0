"""CSV carriers for voltage series and quench events.

Series files have the header ``timestamp_ns,value_volts`` and one sample per
line; event files have ``magnet_id,t_event_ns,label``.  Both are UTF-8 with
LF line endings.  Values round-trip exactly: floats are written with
``repr`` (shortest representation that parses back to the same bits).
"""

from __future__ import annotations

import io
import os
from pathlib import Path

from quenchwatch.ingest.windows import QuenchEvent
from quenchwatch.signals import VoltageSeries

SERIES_HEADER = "timestamp_ns,value_volts"
EVENTS_HEADER = "magnet_id,t_event_ns,label"

# Accepted relative deviation of any timestamp step from the inferred dt.
JITTER_TOLERANCE = 1e-6


class ParseError(ValueError):
    """Malformed row; carries the 1-based row number."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class NonUniformSampling(ValueError):
    """Timestamp step deviates from the inferred interval; carries the row number."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class EmptyFile(ValueError):
    """File has a header but no data rows, or is empty."""


def load_series(
    path: str | os.PathLike,
    fmt: str = "csv",
    magnet_id: str | None = None,
    circuit_class: str = "600A",
) -> VoltageSeries:
    """Load one uniformly sampled series from a two-column CSV export.

    dt is inferred from the first two rows; any later step that deviates
    from it by more than 1e-6 relative raises NonUniformSampling with the
    offending row number.  The magnet id defaults to the file stem.
    """
    if fmt != "csv":
        raise ValueError(f"unsupported format: {fmt!r}")
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise EmptyFile(f"{path}: empty file")
    header = lines[0].strip()
    if header != SERIES_HEADER:
        raise ParseError(1, f"expected header {SERIES_HEADER!r}, got {header!r}")
    if len(lines) < 2:
        raise EmptyFile(f"{path}: no data rows")

    timestamps: list[int] = []
    values: list[float] = []
    for row_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(row_no, f"expected 2 columns, got {len(parts)}")
        try:
            ts = int(parts[0])
        except ValueError:
            raise ParseError(row_no, f"bad timestamp {parts[0]!r}") from None
        try:
            value = float(parts[1])
        except ValueError:
            raise ParseError(row_no, f"bad value {parts[1]!r}") from None
        timestamps.append(ts)
        values.append(value)

    if not values:
        raise EmptyFile(f"{path}: no data rows")

    if len(timestamps) == 1:
        dt = 1.0
    else:
        step_ns = timestamps[1] - timestamps[0]
        if step_ns <= 0:
            raise NonUniformSampling(3, f"non-increasing timestamp step {step_ns} ns")
        for i in range(1, len(timestamps)):
            d = timestamps[i] - timestamps[i - 1]
            if abs(d - step_ns) > JITTER_TOLERANCE * step_ns:
                raise NonUniformSampling(i + 2, f"step {d} ns deviates from inferred {step_ns} ns")
        dt = step_ns / 1e9

    return VoltageSeries(
        magnet_id=magnet_id if magnet_id is not None else path.stem,
        circuit_class=circuit_class,
        t0=timestamps[0],
        dt=dt,
        values=values,
    )


def serialize_series(series: VoltageSeries) -> bytes:
    """Render a series to CSV bytes (the on-disk and on-wire form)."""
    buf = io.StringIO()
    buf.write(SERIES_HEADER)
    buf.write("\n")
    t0 = series.t0
    dt_ns = series.dt * 1e9
    for i, v in enumerate(series.values):
        buf.write(f"{t0 + round(i * dt_ns)},{float(v)!r}\n")
    return buf.getvalue().encode("utf-8")


def save_series(series: VoltageSeries, path: str | os.PathLike) -> int:
    """Write a series CSV; returns the byte count."""
    data = serialize_series(series)
    Path(path).write_bytes(data)
    return len(data)


def load_events(path: str | os.PathLike) -> list[QuenchEvent]:
    """Load quench events from their three-column CSV."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise EmptyFile(f"{path}: empty file")
    if lines[0].strip() != EVENTS_HEADER:
        raise ParseError(1, f"expected header {EVENTS_HEADER!r}, got {lines[0].strip()!r}")
    events: list[QuenchEvent] = []
    for row_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(row_no, f"expected 3 columns, got {len(parts)}")
        try:
            t_event = int(parts[1])
        except ValueError:
            raise ParseError(row_no, f"bad timestamp {parts[1]!r}") from None
        events.append(QuenchEvent(magnet_id=parts[0], t_event=t_event, label=parts[2]))
    return events


def save_events(events: list[QuenchEvent], path: str | os.PathLike) -> int:
    """Write the events CSV; returns the byte count."""
    buf = io.StringIO()
    buf.write(EVENTS_HEADER)
    buf.write("\n")
    for e in events:
        buf.write(f"{e.magnet_id},{e.t_event},{e.label}\n")
    data = buf.getvalue().encode("utf-8")
    Path(path).write_bytes(data)
    return len(data)
