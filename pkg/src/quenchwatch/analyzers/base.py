"""Uniform analyzer interface and registry.

Every analyzer is a callable taking an input container plus keyword
options and returning one :class:`AnalyzerResult` (or a list of them, one
per input item, for per-window analyses).  New analyzers plug in through
:func:`register` without touching existing ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

_KINDS = ("clustering", "prediction")


@dataclass(frozen=True)
class AnalyzerResult:
    """Common result envelope shared by all analyzers.

    ``assignments`` carries per-item cluster ids for clustering analyses
    (−1 marks noise, which only density clustering produces).  ``scores``
    carries per-timestep prediction error in volts for prediction
    analyses.  ``metadata`` records the analyzer name and its parameters.
    """

    kind: str
    assignments: list[int] | None = None
    scores: list[float] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.kind == "clustering" and self.assignments is None:
            raise ValueError("clustering results need assignments")
        if self.kind == "prediction" and self.scores is None:
            raise ValueError("prediction results need scores")

    def as_dict(self) -> dict:
        """JSON-ready form with stable field names."""
        return {
            "kind": self.kind,
            "assignments": None if self.assignments is None else [int(a) for a in self.assignments],
            "scores": None if self.scores is None else [float(s) for s in self.scores],
            "metadata": self.metadata,
        }


AnalyzerFn = Callable[..., "AnalyzerResult | list"]

_REGISTRY: dict[str, AnalyzerFn] = {}


def register(name: str) -> Callable[[AnalyzerFn], AnalyzerFn]:
    """Decorator adding an analyzer under ``name``; names are unique."""

    def wrap(fn: AnalyzerFn) -> AnalyzerFn:
        if name in _REGISTRY:
            raise ValueError(f"analyzer {name!r} is already registered")
        _REGISTRY[name] = fn
        return fn

    return wrap


def get_analyzer(name: str) -> AnalyzerFn:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"no analyzer named {name!r}; known: {available_analyzers()}") from None


def available_analyzers() -> list[str]:
    return sorted(_REGISTRY)
