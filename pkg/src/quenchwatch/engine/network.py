"""Forward and backward passes over memory-block layers plus the output head.

``cell_forward`` is the single-step reference operation; ``forward_sequence``
and ``backward_bptt`` run whole sequences through the selected kernel
backend.  Stacked layers feed the hidden vector of layer k into layer k+1;
the head maps the topmost hidden vector to the output space at every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from quenchwatch.engine import backend
from quenchwatch.engine.activations import GateConfig, hard_sigmoid
from quenchwatch.engine.params import LstmBlockParams, LstmState, OutputHead


class ShapeMismatch(ValueError):
    """Input, state, or parameter shapes do not line up."""


class LengthMismatch(ValueError):
    """Predictions and targets differ in length."""


@dataclass(frozen=True)
class GateTrace:
    """Per-step gate activations, kept for the backward pass and inspection."""

    g: np.ndarray
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray


@dataclass(frozen=True)
class SequenceTrace:
    """Everything the backward pass needs, per layer (arrays are (T, cells))."""

    layer_inputs: list[np.ndarray]
    H: list[np.ndarray]
    S: list[np.ndarray]
    P: list[np.ndarray]
    G: list[np.ndarray]
    I: list[np.ndarray]
    F: list[np.ndarray]
    O: list[np.ndarray]
    ZI: list[np.ndarray]
    ZF: list[np.ndarray]
    ZO: list[np.ndarray]

    def gate_trace(self, layer: int, t: int) -> GateTrace:
        return GateTrace(
            g=self.G[layer][t].copy(),
            i=self.I[layer][t].copy(),
            f=self.F[layer][t].copy(),
            o=self.O[layer][t].copy(),
        )


@dataclass(frozen=True)
class BlockGradients:
    """Gradients for one block, field-for-field parallel to its parameters.

    Deliberately not an ``LstmBlockParams``: parameter construction rejects
    non-finite values, but a diverging run must still hand its gradients
    back so the trainer can report the divergence instead of crashing.
    """

    W_gx: np.ndarray
    W_gh: np.ndarray
    b_g: np.ndarray
    W_ix: np.ndarray
    W_ih: np.ndarray
    b_i: np.ndarray
    W_fx: np.ndarray
    W_fh: np.ndarray
    b_f: np.ndarray
    W_ox: np.ndarray
    W_oh: np.ndarray
    b_o: np.ndarray

    def tensors(self):
        """Yield (name, array) in the same order as the parameter tensors."""
        for name in (
            "W_gx", "W_gh", "b_g",
            "W_ix", "W_ih", "b_i",
            "W_fx", "W_fh", "b_f",
            "W_ox", "W_oh", "b_o",
        ):
            yield name, getattr(self, name)


@dataclass(frozen=True)
class HeadGradients:
    """Gradients for the output head."""

    W_y: np.ndarray
    b_y: np.ndarray

    def tensors(self):
        yield "W_y", self.W_y
        yield "b_y", self.b_y


@dataclass(frozen=True)
class Gradients:
    """Loss gradients for every tensor, plus the initial-state gradients."""

    layers: list[BlockGradients]
    head: HeadGradients
    dh0: list[np.ndarray]
    ds0: list[np.ndarray]


def _as_layers(params: LstmBlockParams | Sequence[LstmBlockParams]) -> list[LstmBlockParams]:
    if isinstance(params, LstmBlockParams):
        return [params]
    return list(params)


def cell_forward(
    x_t: np.ndarray,
    prev: LstmState,
    params: LstmBlockParams,
    cfg: GateConfig = GateConfig(),
) -> tuple[LstmState, GateTrace]:
    """One step of one memory block.

    Input node g gets the tanh squash; the three gates get the hard sigmoid.
    The internal state blends the gated input with the gated previous state,
    and the hidden vector is the squashed state released by the output gate.
    """
    x = np.asarray(x_t, dtype=np.float64).reshape(-1)
    if x.shape[0] != params.input_size:
        raise ShapeMismatch(f"input has {x.shape[0]} entries, block expects {params.input_size}")
    if prev.h.shape[0] != params.cell_count:
        raise ShapeMismatch(f"state has {prev.h.shape[0]} cells, block expects {params.cell_count}")

    g = np.tanh(params.W_gx @ x + params.W_gh @ prev.h + params.b_g)
    i = hard_sigmoid(params.W_ix @ x + params.W_ih @ prev.h + params.b_i, cfg)
    f = hard_sigmoid(params.W_fx @ x + params.W_fh @ prev.h + params.b_f, cfg)
    o = hard_sigmoid(params.W_ox @ x + params.W_oh @ prev.h + params.b_o, cfg)

    s = g * i + prev.s * f
    h = np.tanh(s) * o
    return LstmState(h=h, s=s), GateTrace(g=g, i=i, f=f, o=o)


def forward_sequence(
    xs: np.ndarray | Sequence[Sequence[float]],
    params: LstmBlockParams | Sequence[LstmBlockParams],
    head: OutputHead,
    cfg: GateConfig = GateConfig(),
    initial: Sequence[LstmState] | None = None,
) -> tuple[np.ndarray, SequenceTrace]:
    """Run a whole sequence; returns per-step predictions and the full trace.

    The initial state defaults to zeros for every layer.  Predictions are
    ``W_y @ h_top(t) + b_y`` at each step, shape (T, outputs).
    """
    layers = _as_layers(params)
    xs_arr = np.ascontiguousarray(xs, dtype=np.float64)
    if xs_arr.ndim == 1:
        xs_arr = xs_arr[:, None]
    if xs_arr.ndim != 2 or xs_arr.shape[0] == 0:
        raise ShapeMismatch(f"xs must be a non-empty (T, inputs) array, got shape {xs_arr.shape}")
    if xs_arr.shape[1] != layers[0].input_size:
        raise ShapeMismatch(f"inputs have {xs_arr.shape[1]} entries, layer 0 expects {layers[0].input_size}")
    for k in range(1, len(layers)):
        if layers[k].input_size != layers[k - 1].cell_count:
            raise ShapeMismatch(
                f"layer {k} expects {layers[k].input_size} inputs "
                f"but layer {k - 1} emits {layers[k - 1].cell_count}"
            )
    if head.W_y.shape[1] != layers[-1].cell_count:
        raise ShapeMismatch(
            f"head expects {head.W_y.shape[1]} cells but top layer has {layers[-1].cell_count}"
        )
    if initial is not None and len(initial) != len(layers):
        raise ShapeMismatch(f"{len(initial)} initial states for {len(layers)} layers")

    trace = SequenceTrace(
        layer_inputs=[], H=[], S=[], P=[], G=[], I=[], F=[], O=[], ZI=[], ZF=[], ZO=[]
    )
    layer_input = xs_arr
    for k, block in enumerate(layers):
        if initial is None:
            h0 = np.zeros(block.cell_count)
            s0 = np.zeros(block.cell_count)
        else:
            h0 = np.ascontiguousarray(initial[k].h, dtype=np.float64)
            s0 = np.ascontiguousarray(initial[k].s, dtype=np.float64)
        H, S, P, G, I, F, O, ZI, ZF, ZO = backend.layer_forward(
            layer_input,
            block.W_gx, block.W_gh, block.b_g,
            block.W_ix, block.W_ih, block.b_i,
            block.W_fx, block.W_fh, block.b_f,
            block.W_ox, block.W_oh, block.b_o,
            h0, s0, cfg.t_l, cfg.t_h, cfg.a, cfg.b,
        )
        trace.layer_inputs.append(layer_input)
        trace.H.append(H)
        trace.S.append(S)
        trace.P.append(P)
        trace.G.append(G)
        trace.I.append(I)
        trace.F.append(F)
        trace.O.append(O)
        trace.ZI.append(ZI)
        trace.ZF.append(ZF)
        trace.ZO.append(ZO)
        layer_input = np.ascontiguousarray(H)

    predictions = trace.H[-1] @ head.W_y.T + head.b_y
    return predictions, trace


def loss(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Mean squared error over all timesteps and output dimensions."""
    p = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if p.shape[0] != y.shape[0]:
        raise LengthMismatch(f"{p.shape[0]} predictions vs {y.shape[0]} targets")
    if p.size != y.size:
        raise LengthMismatch(f"prediction size {p.shape} vs target size {y.shape}")
    diff = p.reshape(p.shape[0], -1) - y.reshape(y.shape[0], -1)
    return float(np.mean(diff * diff))


def backward_bptt(
    xs: np.ndarray | Sequence[Sequence[float]],
    targets: np.ndarray | Sequence[Sequence[float]],
    params: LstmBlockParams | Sequence[LstmBlockParams],
    head: OutputHead,
    cfg: GateConfig = GateConfig(),
    initial: Sequence[LstmState] | None = None,
) -> Gradients:
    """Full-sequence backpropagation through time for the MSE loss.

    Returns gradients shaped exactly like the parameters, plus the
    gradients with respect to each layer's initial hidden and internal
    state.  The gate derivative is the ramp slope strictly inside the ramp
    and 0 outside, including at the kinks.
    """
    grads, _ = loss_and_gradients(xs, targets, params, head, cfg, initial)
    return grads


def loss_and_gradients(
    xs,
    targets,
    params,
    head: OutputHead,
    cfg: GateConfig = GateConfig(),
    initial: Sequence[LstmState] | None = None,
) -> tuple[Gradients, float]:
    """One forward plus one backward pass; returns (gradients, loss)."""
    layers = _as_layers(params)
    predictions, trace = forward_sequence(xs, layers, head, cfg, initial)

    y = np.asarray(targets, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape != predictions.shape:
        raise LengthMismatch(f"targets shape {y.shape} vs predictions shape {predictions.shape}")

    steps, out_dim = predictions.shape
    mse = float(np.mean((predictions - y) ** 2))
    dpred = 2.0 * (predictions - y) / (steps * out_dim)

    h_top = trace.H[-1]
    d_wy = dpred.T @ h_top
    d_by = dpred.sum(axis=0)
    dH_top = dpred @ head.W_y

    layer_grads: list[BlockGradients | None] = [None] * len(layers)
    dh0s: list[np.ndarray | None] = [None] * len(layers)
    ds0s: list[np.ndarray | None] = [None] * len(layers)

    dH = np.ascontiguousarray(dH_top)
    for k in range(len(layers) - 1, -1, -1):
        block = layers[k]
        zeros = np.zeros(block.cell_count)
        (d_wgx, d_wgh, d_bg, d_wix, d_wih, d_bi, d_wfx, d_wfh, d_bf,
         d_wox, d_woh, d_bo, dXs, dh0, ds0) = backend.layer_backward(
            trace.layer_inputs[k], dH,
            trace.H[k], trace.S[k], trace.P[k],
            trace.G[k], trace.I[k], trace.F[k], trace.O[k],
            trace.ZI[k], trace.ZF[k], trace.ZO[k],
            block.W_gx, block.W_gh, block.W_ix, block.W_ih,
            block.W_fx, block.W_fh, block.W_ox, block.W_oh,
            np.ascontiguousarray(initial[k].h, dtype=np.float64) if initial is not None else zeros,
            np.ascontiguousarray(initial[k].s, dtype=np.float64) if initial is not None else zeros,
            cfg.t_l, cfg.t_h, cfg.a,
        )
        layer_grads[k] = BlockGradients(
            W_gx=d_wgx, W_gh=d_wgh, b_g=d_bg,
            W_ix=d_wix, W_ih=d_wih, b_i=d_bi,
            W_fx=d_wfx, W_fh=d_wfh, b_f=d_bf,
            W_ox=d_wox, W_oh=d_woh, b_o=d_bo,
        )
        dh0s[k] = dh0
        ds0s[k] = ds0
        dH = np.ascontiguousarray(dXs)

    grads = Gradients(
        layers=list(layer_grads),
        head=HeadGradients(W_y=d_wy, b_y=d_by),
        dh0=list(dh0s),
        ds0=list(ds0s),
    )
    return grads, mse
