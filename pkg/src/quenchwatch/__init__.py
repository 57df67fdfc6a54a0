"""Quench monitoring toolkit: signal analysis and recurrent prediction.

The package splits into four layers:

- :mod:`quenchwatch.signals`: voltage series containers, validation, and
  per-series feature extraction.
- :mod:`quenchwatch.ingest`: CSV reading and writing, synthetic dataset
  generation, and labeled window extraction around events.
- :mod:`quenchwatch.engine`: the recurrent memory-block network (forward,
  backpropagation through time, training, snapshots, gradient checking),
  with a compiled kernel and a pure-Python fallback.
- :mod:`quenchwatch.analyzers` and :mod:`quenchwatch.service`: clustering
  and prediction analyses, and the HTTP/CLI surface that ties it together.
"""

__version__ = "0.1.0"
