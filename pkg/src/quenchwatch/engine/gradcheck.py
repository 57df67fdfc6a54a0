"""Numerical verification of the analytic gradients.

Central differences are compared against the backward pass on freshly
drawn parameter values and input data.  The gate nonlinearity has kinks
where its derivative jumps, so any trial whose gate pre-activations land
near a kink is redrawn: a central difference straddling a kink measures
the average of two slopes and would disagree with the analytic value for
a correct implementation.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from quenchwatch.engine.activations import GateConfig
from quenchwatch.engine.network import forward_sequence, loss, loss_and_gradients
from quenchwatch.engine.params import LstmBlockParams, LstmState, OutputHead

_ERROR_FLOOR = 1e-8
_MAX_REDRAWS = 200


@dataclass(frozen=True)
class GradientCheckReport:
    """Worst relative error per tensor and the overall verdict."""

    passed: bool
    worst_error: float
    worst_tensor: str
    per_tensor: dict[str, float]
    trial_count: int
    delta: float
    tolerance: float

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict}: worst relative error {self.worst_error:.3e} "
            f"({self.worst_tensor}) over {self.trial_count} trials, "
            f"tolerance {self.tolerance:.1e}"
        )


def _draw_like(rng: np.random.Generator, value: np.ndarray) -> np.ndarray:
    return rng.uniform(-0.7, 0.7, size=value.shape)


def _redraw(
    rng: np.random.Generator,
    shape_layers: list[LstmBlockParams],
    shape_head: OutputHead,
    seq_len: int,
) -> tuple[list[LstmBlockParams], OutputHead, list[LstmState], np.ndarray, np.ndarray]:
    layers = [
        LstmBlockParams(**{name: _draw_like(rng, value) for name, value in block.tensors()})
        for block in shape_layers
    ]
    head = OutputHead(
        W_y=_draw_like(rng, shape_head.W_y), b_y=_draw_like(rng, shape_head.b_y)
    )
    initial = [
        LstmState(
            h=rng.uniform(-0.5, 0.5, size=block.cell_count),
            s=rng.uniform(-0.5, 0.5, size=block.cell_count),
        )
        for block in shape_layers
    ]
    xs = rng.uniform(-1.0, 1.0, size=(seq_len, shape_layers[0].input_size))
    targets = rng.uniform(-1.0, 1.0, size=(seq_len, shape_head.output_size))
    return layers, head, initial, xs, targets


def _min_kink_distance(trace, cfg: GateConfig) -> float:
    worst = np.inf
    for pre in (*trace.ZI, *trace.ZF, *trace.ZO):
        worst = min(
            worst,
            float(np.min(np.abs(pre - cfg.t_l))),
            float(np.min(np.abs(pre - cfg.t_h))),
        )
    return worst


def _numeric_loss(xs, targets, layers, head, cfg, initial) -> float:
    predictions, _ = forward_sequence(xs, layers, head, cfg, initial)
    return loss(predictions, targets)


def _relative_error(analytic: float, numeric: float) -> float:
    scale = max(abs(analytic), abs(numeric), _ERROR_FLOOR)
    return abs(analytic - numeric) / scale


def gradient_check(
    params: LstmBlockParams | list[LstmBlockParams],
    head: OutputHead,
    cfg: GateConfig = GateConfig(),
    trial_count: int = 20,
    delta: float = 1e-5,
    tolerance: float = 1e-4,
    seed: int = 0,
    seq_len: int = 4,
) -> GradientCheckReport:
    """Compare analytic gradients against central differences.

    ``params`` and ``head`` only fix the shapes; every trial draws fresh
    values for all tensors, initial states, inputs, and targets.  Checks
    every parameter entry plus the initial-state gradients.
    """
    if trial_count < 1:
        raise ValueError("trial_count must be at least 1")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    shape_layers = [params] if isinstance(params, LstmBlockParams) else list(params)
    rng = np.random.default_rng(seed)
    kink_margin = max(100.0 * delta, 1e-3)

    per_tensor: dict[str, float] = {}

    def record(name: str, err: float) -> None:
        if err > per_tensor.get(name, 0.0):
            per_tensor[name] = err

    for _ in range(trial_count):
        for attempt in range(_MAX_REDRAWS):
            layers, head_t, initial, xs, targets = _redraw(rng, shape_layers, head, seq_len)
            _, trace = forward_sequence(xs, layers, head_t, cfg, initial)
            if _min_kink_distance(trace, cfg) > kink_margin:
                break
        else:
            raise RuntimeError(
                f"could not draw a trial clear of gate kinks in {_MAX_REDRAWS} attempts"
            )

        grads, _ = loss_and_gradients(xs, targets, layers, head_t, cfg, initial)

        for k, block in enumerate(layers):
            for name, value in block.tensors():
                analytic = getattr(grads.layers[k], name)
                flat = value.ravel()
                for j in range(flat.size):
                    bumped = value.copy()
                    bumped.flat[j] = flat[j] + delta
                    plus = dataclasses.replace(block, **{name: bumped})
                    lp = _numeric_loss(
                        xs, targets, layers[:k] + [plus] + layers[k + 1:], head_t, cfg, initial
                    )
                    bumped = value.copy()
                    bumped.flat[j] = flat[j] - delta
                    minus = dataclasses.replace(block, **{name: bumped})
                    lm = _numeric_loss(
                        xs, targets, layers[:k] + [minus] + layers[k + 1:], head_t, cfg, initial
                    )
                    numeric = (lp - lm) / (2.0 * delta)
                    record(f"layer{k}.{name}", _relative_error(analytic.flat[j], numeric))

        for name, value in head_t.tensors():
            analytic = getattr(grads.head, name)
            flat = value.ravel()
            for j in range(flat.size):
                bumped = value.copy()
                bumped.flat[j] = flat[j] + delta
                lp = _numeric_loss(
                    xs, targets, layers, dataclasses.replace(head_t, **{name: bumped}), cfg, initial
                )
                bumped = value.copy()
                bumped.flat[j] = flat[j] - delta
                lm = _numeric_loss(
                    xs, targets, layers, dataclasses.replace(head_t, **{name: bumped}), cfg, initial
                )
                numeric = (lp - lm) / (2.0 * delta)
                record(f"head.{name}", _relative_error(analytic.flat[j], numeric))

        for k, state in enumerate(initial):
            for label, vec, analytic in (
                ("h0", state.h, grads.dh0[k]),
                ("s0", state.s, grads.ds0[k]),
            ):
                for j in range(vec.size):
                    bumped = vec.copy()
                    bumped[j] += delta
                    plus_state = (
                        LstmState(h=bumped, s=state.s) if label == "h0"
                        else LstmState(h=state.h, s=bumped)
                    )
                    lp = _numeric_loss(
                        xs, targets, layers, head_t, cfg,
                        initial[:k] + [plus_state] + initial[k + 1:],
                    )
                    bumped = vec.copy()
                    bumped[j] -= delta
                    minus_state = (
                        LstmState(h=bumped, s=state.s) if label == "h0"
                        else LstmState(h=state.h, s=bumped)
                    )
                    lm = _numeric_loss(
                        xs, targets, layers, head_t, cfg,
                        initial[:k] + [minus_state] + initial[k + 1:],
                    )
                    numeric = (lp - lm) / (2.0 * delta)
                    record(f"layer{k}.{label}", _relative_error(analytic[j], numeric))

    worst_tensor = max(per_tensor, key=per_tensor.get)
    worst_error = per_tensor[worst_tensor]
    return GradientCheckReport(
        passed=worst_error < tolerance,
        worst_error=worst_error,
        worst_tensor=worst_tensor,
        per_tensor=dict(sorted(per_tensor.items())),
        trial_count=trial_count,
        delta=delta,
        tolerance=tolerance,
    )
