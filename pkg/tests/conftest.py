"""Shared fixtures plus the acceptance summary printed after the run."""

from __future__ import annotations

import numpy as np
import pytest

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE_RESULTS[name] = report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS.items():
        mark = "PASS" if outcome == "PASSED" else outcome
        terminalreporter.write_line(f"  [{mark}] {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_series():
    """Factory for small VoltageSeries with sensible defaults."""
    from quenchwatch.signals import VoltageSeries

    def build(values, t0=1_000_000_000_000, dt=0.02, magnet_id="QTEST.001", circuit_class="600A"):
        return VoltageSeries(
            magnet_id=magnet_id,
            circuit_class=circuit_class,
            t0=t0,
            dt=dt,
            values=np.asarray(values, dtype=np.float64),
        )

    return build
