"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-numpy
fallback keeps everything working from a plain source checkout.  Set
``QUENCHWATCH_KERNEL=python`` or ``QUENCHWATCH_KERNEL=compiled`` to force a
choice (forcing ``compiled`` raises if the extension is missing).

Both kernels satisfy the same contract and agree to floating-point rounding
(they may differ in the last few ulps because accumulation order differs);
all determinism guarantees hold per backend.
"""

from __future__ import annotations

import os

from quenchwatch.engine import _kernel_py

_ENV_VAR = "QUENCHWATCH_KERNEL"
_requested = os.environ.get(_ENV_VAR, "").strip().lower()
if _requested not in ("", "compiled", "python"):
    raise RuntimeError(f"{_ENV_VAR} must be 'compiled' or 'python', got {_requested!r}")

if _requested == "python":
    KERNEL_KIND = "python"
    _impl = _kernel_py
else:
    try:
        from quenchwatch.engine import _kernel as _compiled  # type: ignore[attr-defined]

        KERNEL_KIND = "compiled"
        _impl = _compiled
    except ImportError:
        if _requested == "compiled":
            raise RuntimeError(
                "QUENCHWATCH_KERNEL=compiled but the extension is not built; "
                "run `pip install -e .` or `python setup.py build_ext --inplace`"
            ) from None
        KERNEL_KIND = "python"
        _impl = _kernel_py

layer_forward = _impl.layer_forward
layer_backward = _impl.layer_backward

__all__ = ["KERNEL_KIND", "layer_forward", "layer_backward"]
