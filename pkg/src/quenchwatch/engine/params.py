"""Parameter containers for the memory block, output head, and training runs."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterator

import numpy as np

#: Forget-gate bias at initialization; biasing the gate open keeps the
#: self-recurrent state path conductive from the first epochs.
FORGET_BIAS_INIT = 1.0

WEIGHT_NAMES = ("W_gx", "W_gh", "b_g", "W_ix", "W_ih", "b_i", "W_fx", "W_fh", "b_f", "W_ox", "W_oh", "b_o")


def _as_f64(value) -> np.ndarray:
    arr = np.ascontiguousarray(value, dtype=np.float64)
    return arr


@dataclass(frozen=True)
class LstmBlockParams:
    """All weights of one memory-block layer.

    Per gate/node: an input projection (cells x inputs), a recurrent
    projection (cells x cells), and a bias (cells).  g is the tanh input
    node; i, f, o are the input, forget, and output gates.
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

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, _as_f64(getattr(self, f.name)))
        c, d = self.W_gx.shape
        for name in WEIGHT_NAMES:
            arr = getattr(self, name)
            expected = (c, d) if name.endswith("x") else (c, c) if name.endswith("h") else (c,)
            if arr.shape != expected:
                raise ValueError(f"{name} has shape {arr.shape}, expected {expected}")
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def cell_count(self) -> int:
        return self.W_gx.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_gx.shape[1]

    def tensors(self) -> Iterator[tuple[str, np.ndarray]]:
        for name in WEIGHT_NAMES:
            yield name, getattr(self, name)

    def copy(self) -> "LstmBlockParams":
        return LstmBlockParams(**{name: arr.copy() for name, arr in self.tensors()})


@dataclass(frozen=True)
class LstmState:
    """Recurrent state: hidden vector h and internal state s, one entry per cell."""

    h: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", _as_f64(self.h))
        object.__setattr__(self, "s", _as_f64(self.s))
        if self.h.shape != self.s.shape or self.h.ndim != 1:
            raise ValueError(f"state vectors must be equal-length 1-D, got {self.h.shape} and {self.s.shape}")
        if not (np.isfinite(self.h).all() and np.isfinite(self.s).all()):
            raise ValueError("state contains non-finite entries")

    @classmethod
    def zeros(cls, cell_count: int) -> "LstmState":
        return cls(h=np.zeros(cell_count), s=np.zeros(cell_count))


@dataclass(frozen=True)
class OutputHead:
    """Feed-forward map from the topmost hidden vector to the output space."""

    W_y: np.ndarray
    b_y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "W_y", _as_f64(self.W_y))
        object.__setattr__(self, "b_y", _as_f64(self.b_y))
        if self.W_y.ndim != 2 or self.b_y.shape != (self.W_y.shape[0],):
            raise ValueError(f"inconsistent head shapes {self.W_y.shape} / {self.b_y.shape}")
        if not (np.isfinite(self.W_y).all() and np.isfinite(self.b_y).all()):
            raise ValueError("head contains non-finite entries")

    @property
    def output_size(self) -> int:
        return self.W_y.shape[0]

    def tensors(self) -> Iterator[tuple[str, np.ndarray]]:
        yield "W_y", self.W_y
        yield "b_y", self.b_y

    def copy(self) -> "OutputHead":
        return OutputHead(W_y=self.W_y.copy(), b_y=self.b_y.copy())


@dataclass(frozen=True)
class Hyperparameters:
    """One training configuration, recorded immutably on every job."""

    cell_count: int
    layer_count: int = 1
    input_window: int = 1
    learning_rate: float = 0.05
    epochs: int = 100
    batch_size: int = 4
    seed: int = 0

    def __post_init__(self):
        for name in ("cell_count", "layer_count", "input_window", "batch_size"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        # epochs=0 is allowed: training then returns the initialization untouched
        if not isinstance(self.epochs, int) or isinstance(self.epochs, bool) or self.epochs < 0:
            raise ValueError(f"epochs must be a non-negative integer, got {self.epochs!r}")
        if not (self.learning_rate > 0):
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")


def init_block(cell_count: int, input_size: int, rng: np.random.Generator) -> LstmBlockParams:
    """Uniform init in [-1/sqrt(cells), +1/sqrt(cells)], forget bias opened."""
    bound = 1.0 / np.sqrt(cell_count)

    def draw(*shape):
        return rng.uniform(-bound, bound, shape)

    return LstmBlockParams(
        W_gx=draw(cell_count, input_size),
        W_gh=draw(cell_count, cell_count),
        b_g=draw(cell_count),
        W_ix=draw(cell_count, input_size),
        W_ih=draw(cell_count, cell_count),
        b_i=draw(cell_count),
        W_fx=draw(cell_count, input_size),
        W_fh=draw(cell_count, cell_count),
        b_f=draw(cell_count) + FORGET_BIAS_INIT,
        W_ox=draw(cell_count, input_size),
        W_oh=draw(cell_count, cell_count),
        b_o=draw(cell_count),
    )


def init_params(
    hp: Hyperparameters,
    rng: np.random.Generator,
    output_size: int = 1,
) -> tuple[list[LstmBlockParams], OutputHead]:
    """Seeded initialization of all layers plus the output head.

    Layer 0 consumes the input window; deeper layers consume the hidden
    vector of the layer below.
    """
    layers = []
    for layer in range(hp.layer_count):
        input_size = hp.input_window if layer == 0 else hp.cell_count
        layers.append(init_block(hp.cell_count, input_size, rng))
    bound = 1.0 / np.sqrt(hp.cell_count)
    head = OutputHead(
        W_y=rng.uniform(-bound, bound, (output_size, hp.cell_count)),
        b_y=rng.uniform(-bound, bound, output_size),
    )
    return layers, head
