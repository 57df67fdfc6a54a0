"""Model persistence as canonical JSON.

Tensor entries are serialized as decimal strings with 17 significant
digits, which is enough for ``float`` to restore every double bit for bit.
The byte encoding is canonical (sorted keys, no whitespace), so the same
model always produces the same bytes and therefore the same content id.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from quenchwatch.engine.activations import GateConfig
from quenchwatch.engine.network import forward_sequence
from quenchwatch.engine.params import (
    Hyperparameters,
    LstmBlockParams,
    OutputHead,
    WEIGHT_NAMES,
)

FORMAT_TAG = "quenchwatch-model-v1"


class SnapshotFormatError(ValueError):
    """The file is not a model snapshot this version can read."""


@dataclass(frozen=True)
class ModelSnapshot:
    """A trained (or freshly initialized) model, ready to run or persist."""

    hyperparameters: Hyperparameters
    gate_config: GateConfig
    layers: list[LstmBlockParams]
    head: OutputHead

    def predict(self, xs: np.ndarray | Sequence[Sequence[float]]) -> np.ndarray:
        """Per-step predictions for one input sequence, shape (T, outputs)."""
        predictions, _ = forward_sequence(xs, self.layers, self.head, self.gate_config)
        return predictions


def _encode_tensor(value: np.ndarray) -> dict:
    return {
        "shape": list(value.shape),
        "data": [format(x, ".17g") for x in value.ravel(order="C")],
    }


def _decode_tensor(obj: dict) -> np.ndarray:
    try:
        shape = tuple(int(d) for d in obj["shape"])
        flat = np.array([float(x) for x in obj["data"]], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotFormatError(f"bad tensor entry: {exc}") from exc
    expected = 1
    for dim in shape:
        expected *= dim
    if flat.size != expected:
        raise SnapshotFormatError(f"tensor data length {flat.size} does not match shape {shape}")
    return np.ascontiguousarray(flat.reshape(shape))


def snapshot_to_bytes(snapshot: ModelSnapshot) -> bytes:
    """Canonical byte encoding; equal models yield equal bytes."""
    hp = snapshot.hyperparameters
    cfg = snapshot.gate_config
    doc = {
        "format": FORMAT_TAG,
        "hyperparameters": {
            "cell_count": hp.cell_count,
            "layer_count": hp.layer_count,
            "input_window": hp.input_window,
            "learning_rate": hp.learning_rate,
            "epochs": hp.epochs,
            "batch_size": hp.batch_size,
            "seed": hp.seed,
        },
        "gate_config": {"t_l": cfg.t_l, "t_h": cfg.t_h, "a": cfg.a, "b": cfg.b},
        "layers": [
            {name: _encode_tensor(value) for name, value in block.tensors()}
            for block in snapshot.layers
        ],
        "head": {name: _encode_tensor(value) for name, value in snapshot.head.tensors()},
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def snapshot_from_bytes(raw: bytes) -> ModelSnapshot:
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG:
        raise SnapshotFormatError(f"unrecognized format tag {doc.get('format')!r}"
                                  if isinstance(doc, dict) else "top level is not an object")
    try:
        hp_doc = doc["hyperparameters"]
        hp = Hyperparameters(
            cell_count=int(hp_doc["cell_count"]),
            layer_count=int(hp_doc["layer_count"]),
            input_window=int(hp_doc["input_window"]),
            learning_rate=float(hp_doc["learning_rate"]),
            epochs=int(hp_doc["epochs"]),
            batch_size=int(hp_doc["batch_size"]),
            seed=int(hp_doc["seed"]),
        )
        cfg_doc = doc["gate_config"]
        cfg = GateConfig(
            t_l=float(cfg_doc["t_l"]),
            t_h=float(cfg_doc["t_h"]),
            a=float(cfg_doc["a"]),
            b=float(cfg_doc["b"]),
        )
        layers = [
            LstmBlockParams(**{name: _decode_tensor(block_doc[name]) for name in WEIGHT_NAMES})
            for block_doc in doc["layers"]
        ]
        head_doc = doc["head"]
        head = OutputHead(W_y=_decode_tensor(head_doc["W_y"]), b_y=_decode_tensor(head_doc["b_y"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SnapshotFormatError):
            raise
        raise SnapshotFormatError(f"malformed snapshot: {exc}") from exc
    return ModelSnapshot(hyperparameters=hp, gate_config=cfg, layers=layers, head=head)


def model_id(snapshot: ModelSnapshot) -> str:
    """Content-addressed id: stable across processes for the same model."""
    digest = hashlib.sha256(snapshot_to_bytes(snapshot)).hexdigest()
    return f"m-{digest[:12]}"


def save_snapshot(snapshot: ModelSnapshot, path: str | Path) -> Path:
    """Write the canonical encoding; the file hash is the model identity."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(snapshot_to_bytes(snapshot))
    return target


def load_snapshot(path: str | Path) -> ModelSnapshot:
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(f"no snapshot at {source}")
    return snapshot_from_bytes(source.read_bytes())
