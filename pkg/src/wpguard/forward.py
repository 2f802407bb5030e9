"""Reference forward pass for ModelIR.

Used to produce model predictions for verdict scoring and as the brute-force
oracle when testing the backward bounds engine. Everything runs in float64
with no approximations so results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .model_ir import ModelIR

DEFAULT_LABEL_THRESHOLD = 0.5


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "linear":
        return z
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if name == "tanh":
        return np.tanh(z)
    raise ValueError(f"unknown activation {name!r}")


def forward(model: ModelIR, x) -> np.ndarray:
    """Apply each layer in order: activation(W @ x + b). Returns the final vector."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != model.input_dim:
        raise DimensionMismatchError(
            f"input has shape {v.shape}, model expects length {model.input_dim}"
        )
    if not np.all(np.isfinite(v)):
        raise DimensionMismatchError("input entries must be finite")
    for layer in model.layers:
        v = _activate(layer.activation, layer.weights @ v + layer.bias)
    return v


def forward_batch(model: ModelIR, rows) -> np.ndarray:
    """Row-wise forward pass; output row order matches input row order."""
    m = np.asarray(rows, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] != model.input_dim:
        raise DimensionMismatchError(
            f"rows have shape {m.shape}, model expects width {model.input_dim}"
        )
    v = m
    for layer in model.layers:
        v = _activate(layer.activation, v @ layer.weights.T + layer.bias)
    return v


def predict_label(y, threshold: float = DEFAULT_LABEL_THRESHOLD) -> int:
    """Binarize a network output: 1 iff y[0] >= threshold (boundary maps to 1)."""
    arr = np.asarray(y, dtype=np.float64)
    if arr.size == 0:
        raise DimensionMismatchError("cannot binarize an empty output")
    return int(arr.ravel()[0] >= threshold)


@dataclass(frozen=True)
class Prediction:
    raw_output: np.ndarray
    label: int


def predict(model: ModelIR, x, threshold: float = DEFAULT_LABEL_THRESHOLD) -> Prediction:
    y = forward(model, x)
    return Prediction(raw_output=y, label=predict_label(y, threshold))


def predict_labels(model: ModelIR, rows, threshold: float = DEFAULT_LABEL_THRESHOLD) -> np.ndarray:
    """Vector of 0/1 labels for a batch of rows."""
    outputs = forward_batch(model, rows)
    return (outputs[:, 0] >= threshold).astype(np.int64)
