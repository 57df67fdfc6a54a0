"""Mini-batch gradient descent over sequences.

The trainer owns all randomness: parameter initialization and the per-epoch
shuffle both come from one generator seeded by the hyperparameters, so a
fixed seed reproduces the run bit for bit on a given kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from quenchwatch.engine.activations import GateConfig
from quenchwatch.engine.network import loss_and_gradients
from quenchwatch.engine.params import (
    Hyperparameters,
    LstmBlockParams,
    OutputHead,
    init_params,
)
from quenchwatch.engine.snapshot import ModelSnapshot


@dataclass
class TrainingTrace:
    """Mean training loss per epoch, in epoch order."""

    epoch_losses: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.epoch_losses)


class DivergenceDetected(RuntimeError):
    """Loss or parameters left the float range; carries the partial trace."""

    def __init__(self, epoch: int, trace: TrainingTrace):
        super().__init__(f"training diverged during epoch {epoch}")
        self.epoch = epoch
        self.trace = trace


ProgressCallback = Callable[[int, float], None]


def _coerce_dataset(
    dataset: Sequence[tuple[np.ndarray, np.ndarray]],
) -> tuple[list[np.ndarray], list[np.ndarray], int]:
    if len(dataset) == 0:
        raise ValueError("training needs at least one sequence")
    inputs: list[np.ndarray] = []
    targets: list[np.ndarray] = []
    for xs, ys in dataset:
        x = np.ascontiguousarray(xs, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        y = np.ascontiguousarray(ys, dtype=np.float64)
        if y.ndim == 1:
            y = y[:, None]
        inputs.append(x)
        targets.append(y)
    output_size = targets[0].shape[1]
    return inputs, targets, output_size


def _apply_update(
    layers: list[LstmBlockParams],
    head: OutputHead,
    grad_sums: list[dict[str, np.ndarray]],
    head_sums: dict[str, np.ndarray],
    lr_over_batch: float,
) -> tuple[list[LstmBlockParams], OutputHead] | None:
    """SGD step on accumulated gradient sums; None when the result is non-finite.

    New tensors are checked before the parameter containers are built,
    because the containers refuse non-finite values.
    """
    new_layers: list[LstmBlockParams] = []
    for block, sums in zip(layers, grad_sums):
        tensors = {}
        for name, value in block.tensors():
            updated = value - lr_over_batch * sums[name]
            if not np.all(np.isfinite(updated)):
                return None
            tensors[name] = updated
        new_layers.append(LstmBlockParams(**tensors))
    new_wy = head.W_y - lr_over_batch * head_sums["W_y"]
    new_by = head.b_y - lr_over_batch * head_sums["b_y"]
    if not (np.all(np.isfinite(new_wy)) and np.all(np.isfinite(new_by))):
        return None
    return new_layers, OutputHead(W_y=new_wy, b_y=new_by)


def train(
    dataset: Sequence[tuple[np.ndarray, np.ndarray]],
    hp: Hyperparameters,
    cfg: GateConfig = GateConfig(),
    progress: ProgressCallback | None = None,
) -> tuple[ModelSnapshot, TrainingTrace]:
    """Fit a model to (inputs, targets) sequence pairs.

    Each epoch visits every sequence once in a shuffled order, in
    mini-batches of ``hp.batch_size``; the update uses the mean gradient
    over the batch.  The trace records the mean of the per-sequence losses
    seen during the epoch.  ``hp.epochs == 0`` returns the freshly
    initialized model and an empty trace.

    Raises :class:`DivergenceDetected` as soon as a loss or an updated
    parameter stops being finite; the exception carries the epochs that
    completed before the blow-up.
    """
    inputs, targets, output_size = _coerce_dataset(dataset)

    rng = np.random.default_rng(hp.seed)
    layers, head = init_params(hp, rng, output_size=output_size)

    trace = TrainingTrace()
    for epoch in range(hp.epochs):
        order = rng.permutation(len(inputs))
        loss_sum = 0.0
        for start in range(0, len(order), hp.batch_size):
            batch = order[start:start + hp.batch_size]
            grad_sums = [
                {name: np.zeros_like(value) for name, value in block.tensors()}
                for block in layers
            ]
            head_sums = {"W_y": np.zeros_like(head.W_y), "b_y": np.zeros_like(head.b_y)}
            # Overflow inside the batch is not an error: it surfaces as a
            # non-finite loss or parameter and is reported as a divergence.
            with np.errstate(over="ignore", invalid="ignore"):
                for idx in batch:
                    grads, mse = loss_and_gradients(inputs[idx], targets[idx], layers, head, cfg)
                    if not np.isfinite(mse):
                        raise DivergenceDetected(epoch, trace)
                    loss_sum += mse
                    for sums, block_grads in zip(grad_sums, grads.layers):
                        for name, value in block_grads.tensors():
                            sums[name] += value
                    head_sums["W_y"] += grads.head.W_y
                    head_sums["b_y"] += grads.head.b_y
                updated = _apply_update(
                    layers, head, grad_sums, head_sums, hp.learning_rate / len(batch)
                )
            if updated is None:
                raise DivergenceDetected(epoch, trace)
            layers, head = updated
        epoch_loss = loss_sum / len(inputs)
        trace.epoch_losses.append(epoch_loss)
        if progress is not None:
            progress(epoch, epoch_loss)

    snapshot = ModelSnapshot(hyperparameters=hp, gate_config=cfg, layers=layers, head=head)
    return snapshot, trace
