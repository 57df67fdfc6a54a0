"""Memory-block recurrent network built from first principles.

The recurrence is the classic gated memory block: an input node squashed by
tanh, three hard-sigmoid gates (input, forget, output), a self-recurrent
internal state, and a feed-forward head mapping hidden vectors to outputs.
Sequence forward and backward passes run on a compiled kernel when the
extension is built, or on a pure-numpy fallback otherwise (see
:mod:`quenchwatch.engine.backend`).
"""

from quenchwatch.engine.activations import GateConfig, hard_sigmoid, hard_sigmoid_grad
from quenchwatch.engine.backend import KERNEL_KIND
from quenchwatch.engine.gradcheck import GradientCheckReport, gradient_check
from quenchwatch.engine.network import (
    GateTrace,
    Gradients,
    LengthMismatch,
    ShapeMismatch,
    backward_bptt,
    cell_forward,
    forward_sequence,
    loss,
    loss_and_gradients,
)
from quenchwatch.engine.params import (
    Hyperparameters,
    LstmBlockParams,
    LstmState,
    OutputHead,
    init_params,
)
from quenchwatch.engine.snapshot import ModelSnapshot, load_snapshot, save_snapshot
from quenchwatch.engine.training import DivergenceDetected, TrainingTrace, train

__all__ = [
    "GateConfig",
    "hard_sigmoid",
    "hard_sigmoid_grad",
    "KERNEL_KIND",
    "LstmBlockParams",
    "LstmState",
    "OutputHead",
    "Hyperparameters",
    "init_params",
    "GateTrace",
    "Gradients",
    "ShapeMismatch",
    "LengthMismatch",
    "cell_forward",
    "forward_sequence",
    "loss",
    "loss_and_gradients",
    "backward_bptt",
    "train",
    "TrainingTrace",
    "DivergenceDetected",
    "ModelSnapshot",
    "save_snapshot",
    "load_snapshot",
    "gradient_check",
    "GradientCheckReport",
]
