"""HTTP service, job execution, persistent store, and CLI."""

from quenchwatch.service.store import DataStore, MalformedRequest, NotFound, decimate_minmax

__all__ = ["DataStore", "MalformedRequest", "NotFound", "decimate_minmax"]
