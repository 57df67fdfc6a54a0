"""Gate activation: a piecewise-linear sigmoid that saturates exactly.

Unlike the asymptotic logistic function, this activation reaches 0 and 1
exactly, so a gate can be fully closed or fully open.  With the forget gate
pinned at 1 and the input gate at 0 the internal state recurs unchanged and
gradients travel back through arbitrarily many steps without decay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_CONTINUITY_TOL = 1e-12


@dataclass(frozen=True)
class GateConfig:
    """Thresholds and affine segment of the gate activation.

    Saturates to 0 at or below ``t_l`` and to 1 at or above ``t_h``;
    in between the value is ``a * x + b``.  The segment must meet the
    saturation levels at both thresholds, which pins a and b to
    1 / (t_h - t_l) and -t_l / (t_h - t_l).
    """

    t_l: float = -2.5
    t_h: float = 2.5
    a: float = 0.2
    b: float = 0.5

    def __post_init__(self):
        if not self.t_l < self.t_h:
            raise ValueError(f"t_l must be < t_h, got {self.t_l} >= {self.t_h}")
        if abs(self.a * self.t_l + self.b) > _CONTINUITY_TOL:
            raise ValueError(f"a * t_l + b must be 0, got {self.a * self.t_l + self.b!r}")
        if abs(self.a * self.t_h + self.b - 1.0) > _CONTINUITY_TOL:
            raise ValueError(f"a * t_h + b must be 1, got {self.a * self.t_h + self.b!r}")

    @classmethod
    def from_thresholds(cls, t_l: float, t_h: float) -> "GateConfig":
        """Config with the slope and intercept implied by the thresholds."""
        if not t_l < t_h:
            raise ValueError(f"t_l must be < t_h, got {t_l} >= {t_h}")
        span = t_h - t_l
        return cls(t_l=t_l, t_h=t_h, a=1.0 / span, b=-t_l / span)


def hard_sigmoid(x, cfg: GateConfig = GateConfig()):
    """Gate activation: exactly 0 below t_l, exactly 1 above t_h, affine between.

    Accepts scalars or arrays; saturation is exact assignment, not clipping
    of an asymptote.
    """
    arr = np.asarray(x, dtype=np.float64)
    out = cfg.a * arr + cfg.b
    out = np.where(arr <= cfg.t_l, 0.0, out)
    out = np.where(arr >= cfg.t_h, 1.0, out)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def hard_sigmoid_grad(x, cfg: GateConfig = GateConfig()):
    """Derivative of the gate activation: ``a`` strictly inside the ramp, else 0.

    The kinks at t_l and t_h get subgradient 0.
    """
    arr = np.asarray(x, dtype=np.float64)
    out = np.where((arr > cfg.t_l) & (arr < cfg.t_h), cfg.a, 0.0)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out
