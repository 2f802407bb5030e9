"""Trained-model interchange format: in-memory IR plus JSON load/save.

The file format is deliberately minimal so any training framework can emit it:

    {
      "name": "pima-3layer",
      "input_dim": 8,
      "layers": [
        {"weights": [[...], ...], "bias": [...], "activation": "relu"},
        ...
      ]
    }

Weights are stored out_dim x in_dim (row i holds the multipliers feeding
output neuron i), biases have length out_dim, and consecutive layers must
chain: layer k's in_dim equals layer k-1's out_dim. Exporters own any
transposition from their framework's native orientation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelDimensionError, ModelParseError, ModelSchemaError

ACTIVATIONS = ("linear", "relu", "sigmoid", "tanh")


@dataclass(frozen=True)
class LayerIR:
    """One dense layer: weights (out_dim x in_dim), bias (out_dim), activation tag."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class ModelIR:
    """An ordered stack of dense layers with a fixed input width."""

    input_dim: int
    layers: tuple[LayerIR, ...]
    name: str = field(default="")

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def n_layers(self) -> int:
        return len(self.layers)


def _layer_from_dict(obj, index: int) -> LayerIR:
    if not isinstance(obj, dict):
        raise ModelSchemaError(f"layer {index}: expected an object, got {type(obj).__name__}")
    for key in ("weights", "bias", "activation"):
        if key not in obj:
            raise ModelSchemaError(f"layer {index}: missing field '{key}'")
    activation = obj["activation"]
    if activation not in ACTIVATIONS:
        raise ModelSchemaError(
            f"layer {index}: unknown activation {activation!r}; expected one of {ACTIVATIONS}"
        )
    try:
        weights = np.asarray(obj["weights"], dtype=np.float64)
        bias = np.asarray(obj["bias"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ModelSchemaError(f"layer {index}: non-numeric weights or bias ({exc})") from exc
    if weights.ndim != 2 or weights.shape[0] < 1 or weights.shape[1] < 1:
        raise ModelDimensionError(
            f"layer {index}: weights must be a non-empty 2-D matrix, got shape {weights.shape}"
        )
    if bias.ndim != 1:
        raise ModelDimensionError(f"layer {index}: bias must be a flat list")
    if bias.shape[0] != weights.shape[0]:
        raise ModelDimensionError(
            f"layer {index}: bias length {bias.shape[0]} != weight rows {weights.shape[0]}"
        )
    if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
        raise ModelSchemaError(f"layer {index}: weights and bias entries must be finite")
    weights.setflags(write=False)
    bias.setflags(write=False)
    return LayerIR(weights=weights, bias=bias, activation=activation)


def model_from_dict(obj) -> ModelIR:
    """Build a validated ModelIR from a parsed JSON object."""
    if not isinstance(obj, dict):
        raise ModelSchemaError(f"model file must hold a JSON object, got {type(obj).__name__}")
    for key in ("input_dim", "layers"):
        if key not in obj:
            raise ModelSchemaError(f"missing field '{key}'")
    input_dim = obj["input_dim"]
    if not isinstance(input_dim, int) or isinstance(input_dim, bool) or input_dim < 1:
        raise ModelSchemaError(f"input_dim must be a positive integer, got {input_dim!r}")
    raw_layers = obj["layers"]
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ModelSchemaError("layers must be a non-empty list")
    layers = tuple(_layer_from_dict(layer, k) for k, layer in enumerate(raw_layers))
    if layers[0].in_dim != input_dim:
        raise ModelDimensionError(
            f"layer 0: in_dim {layers[0].in_dim} != model input_dim {input_dim}"
        )
    for k in range(1, len(layers)):
        if layers[k].in_dim != layers[k - 1].out_dim:
            raise ModelDimensionError(
                f"layer {k}: in_dim {layers[k].in_dim} != previous out_dim {layers[k - 1].out_dim}"
            )
    name = obj.get("name", "")
    if not isinstance(name, str):
        raise ModelSchemaError("name must be a string")
    return ModelIR(input_dim=input_dim, layers=layers, name=name)


def load_model(path) -> ModelIR:
    """Load and validate a model interchange file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelParseError(f"{path}: malformed JSON ({exc})") from exc
    return model_from_dict(obj)


def model_to_dict(model: ModelIR) -> dict:
    return {
        "name": model.name,
        "input_dim": model.input_dim,
        "layers": [
            {
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation,
            }
            for layer in model.layers
        ],
    }


def save_model(model: ModelIR, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def validate_dims(model: ModelIR) -> list[str]:
    """Return human-readable descriptions of every broken invariant (empty when valid).

    Reporting counterpart of the checks load_model enforces; never raises.
    """
    problems: list[str] = []
    if not model.layers:
        return ["model has no layers"]
    if model.input_dim < 1:
        problems.append(f"input_dim {model.input_dim} < 1")
    for k, layer in enumerate(model.layers):
        if layer.weights.ndim != 2 or layer.out_dim < 1 or layer.in_dim < 1:
            problems.append(f"layer {k}: weights shape {layer.weights.shape} is not a matrix")
            continue
        if layer.bias.ndim != 1 or layer.bias.shape[0] != layer.out_dim:
            problems.append(
                f"layer {k}: bias length {layer.bias.shape} != weight rows {layer.out_dim}"
            )
        if not np.all(np.isfinite(layer.weights)):
            problems.append(f"layer {k}: non-finite weight entry")
        if not np.all(np.isfinite(layer.bias)):
            problems.append(f"layer {k}: non-finite bias entry")
        if layer.activation not in ACTIVATIONS:
            problems.append(f"layer {k}: unknown activation {layer.activation!r}")
    if model.layers[0].in_dim != model.input_dim:
        problems.append(
            f"layer 0: in_dim {model.layers[0].in_dim} != model input_dim {model.input_dim}"
        )
    for k in range(1, len(model.layers)):
        if model.layers[k].in_dim != model.layers[k - 1].out_dim:
            problems.append(
                f"layer {k}: in_dim {model.layers[k].in_dim} != previous out_dim "
                f"{model.layers[k - 1].out_dim}"
            )
    return problems
