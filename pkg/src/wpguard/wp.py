"""Backward predicate transformer for dense networks.

Given an interval [low, high] asserted on the network's final output, this
module pushes it backward layer by layer and emits a predicate tree over the
input features. Each layer step inverts activation(W @ x + b) cmp n:

* the activation is undone elementwise (identity, logit, artanh),
* the affine part is undone through the pseudoinverse of W,
* relu layers additionally emit a second conjunct capturing the clamped
  branch, with bound pinv(W) @ (-b).

Comparison operators are carried through unchanged by every transform. With
mixed-sign weights a matrix product does not preserve elementwise
inequalities, so the resulting bounds are a heuristic signal rather than a
sound preimage; they are exact for monotone diagonal maps. This is the
intended behavior, not a defect to repair here.

Two transform modes exist for the affine step:

* ``corrected`` (default): bound' = pinv(W) @ (bound - b), the algebraic
  solution of y cmp W @ x + b. Testable by forward/backward round-trip.
* ``paper-literal``: bound' = (pinv(W) @ bound) - b, which applies the bias
  after the pseudoinverse. The subtraction is only dimensionally meaningful
  when the bias can be broadcast or truncated to the input width; otherwise
  it raises ModeError. The tanh transform refuses this mode outright because
  its literal formula takes a logarithm of a negative ratio everywhere on
  (-1, 1).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    DomainError,
    ModeError,
    UnsupportedPredicateError,
)
from .linalg import DEFAULT_RCOND, pinv
from .model_ir import LayerIR, ModelIR

DEFAULT_EPSILON = 1e-6

MODE_CORRECTED = "corrected"
MODE_PAPER_LITERAL = "paper-literal"
MODES = (MODE_CORRECTED, MODE_PAPER_LITERAL)


class Cmp(enum.Enum):
    """Comparison operators a predicate atom may carry."""

    GE = ">="
    LE = "<="
    GT = ">"
    LT = "<"
    EQ = "=="
    NE = "!="


_UPPER_CMPS = (Cmp.LE, Cmp.LT)
_LOWER_CMPS = (Cmp.GE, Cmp.GT)


class Predicate:
    """Base class for nodes of the predicate tree."""

    __slots__ = ()


class _TruePredicate(Predicate):
    __slots__ = ()

    def __repr__(self) -> str:
        return "TRUE"


TRUE = _TruePredicate()


@dataclass(frozen=True, eq=False)
class Atom(Predicate):
    """Elementwise constraint ``vector cmp bound`` on a layer's input or output."""

    cmp: Cmp
    bound: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bound, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionMismatchError(f"atom bound must be a non-empty vector, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DimensionMismatchError("atom bound entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "bound", arr)

    @property
    def arity(self) -> int:
        return int(self.bound.shape[0])

    def __repr__(self) -> str:
        return f"Atom(x {self.cmp.value} {np.array2string(self.bound, precision=6)})"


@dataclass(frozen=True, eq=False)
class And(Predicate):
    left: Predicate
    right: Predicate


@dataclass(frozen=True, eq=False)
class Or(Predicate):
    left: Predicate
    right: Predicate


def predicate_equal(a: Predicate, b: Predicate) -> bool:
    """Structural equality with exact (bitwise) bound comparison."""
    if isinstance(a, _TruePredicate) and isinstance(b, _TruePredicate):
        return True
    if isinstance(a, Atom) and isinstance(b, Atom):
        return a.cmp is b.cmp and np.array_equal(a.bound, b.bound)
    if type(a) is type(b) and isinstance(a, (And, Or)):
        return predicate_equal(a.left, b.left) and predicate_equal(a.right, b.right)
    return False


def iter_atoms(pred: Predicate):
    """Yield every Atom in the tree, left to right."""
    if isinstance(pred, Atom):
        yield pred
    elif isinstance(pred, (And, Or)):
        yield from iter_atoms(pred.left)
        yield from iter_atoms(pred.right)


@dataclass(frozen=True)
class Postcondition:
    """Target interval [low, high] asserted on the network's final output."""

    low: float
    high: float

    def __post_init__(self):
        if not (np.isfinite(self.low) and np.isfinite(self.high)):
            raise DomainError("postcondition bounds must be finite")
        if not self.low < self.high:
            raise DomainError(f"postcondition requires low < high, got [{self.low}, {self.high}]")

    def to_predicate(self, out_dim: int) -> Predicate:
        """Initial predicate on the output vector: y >= low AND y <= high."""
        return And(
            Atom(Cmp.GE, np.full(out_dim, self.low, dtype=np.float64)),
            Atom(Cmp.LE, np.full(out_dim, self.high, dtype=np.float64)),
        )


def _fit_bias(bias: np.ndarray, width: int) -> np.ndarray:
    # paper-literal mode subtracts the bias from a vector of the input width;
    # permit exact match, scalar broadcast, or truncation of a longer bias.
    if bias.shape[0] == width:
        return bias
    if not bias.any():
        return np.zeros(width, dtype=np.float64)
    if bias.shape[0] == 1:
        return np.full(width, bias[0], dtype=np.float64)
    if bias.shape[0] > width:
        return bias[:width]
    raise ModeError(
        f"paper-literal mode cannot subtract a length-{bias.shape[0]} bias "
        f"from a length-{width} bound"
    )


def _affine_back(gamma: np.ndarray, bias: np.ndarray, bound: np.ndarray, mode: str) -> np.ndarray:
    if mode == MODE_CORRECTED:
        return gamma @ (bound - bias)
    return (gamma @ bound) - _fit_bias(bias, gamma.shape[0])


def _clamped_logit(bound: np.ndarray, epsilon: float) -> np.ndarray:
    if np.any(bound < 0.0) or np.any(bound > 1.0):
        bad = bound[(bound < 0.0) | (bound > 1.0)][0]
        raise DomainError(f"sigmoid bound {bad} lies outside [0, 1]")
    clipped = np.clip(bound, epsilon, 1.0 - epsilon)
    return np.log(clipped / (1.0 - clipped))


def _clamped_artanh(bound: np.ndarray, epsilon: float) -> np.ndarray:
    if np.any(bound < -1.0) or np.any(bound > 1.0):
        bad = bound[(bound < -1.0) | (bound > 1.0)][0]
        raise DomainError(f"tanh bound {bad} lies outside [-1, 1]")
    clipped = np.clip(bound, -1.0 + epsilon, 1.0 - epsilon)
    return np.arctanh(clipped)


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ModeError(f"unknown mode {mode!r}; expected one of {MODES}")


def _check_atom(layer: LayerIR, atom: Atom) -> None:
    if atom.arity != layer.out_dim:
        raise DimensionMismatchError(
            f"atom arity {atom.arity} != layer out_dim {layer.out_dim}"
        )


def _beta(layer: LayerIR, gamma: np.ndarray, atom: Atom, mode: str, epsilon: float) -> Predicate:
    _check_atom(layer, atom)
    activation = layer.activation
    if activation == "linear":
        return Atom(atom.cmp, _affine_back(gamma, layer.bias, atom.bound, mode))
    if activation == "relu":
        return And(
            Atom(atom.cmp, _affine_back(gamma, layer.bias, atom.bound, mode)),
            Atom(atom.cmp, gamma @ (-layer.bias)),
        )
    if activation == "sigmoid":
        logit = _clamped_logit(atom.bound, epsilon)
        return Atom(atom.cmp, _affine_back(gamma, layer.bias, logit, mode))
    if activation == "tanh":
        if mode == MODE_PAPER_LITERAL:
            raise ModeError(
                "paper-literal tanh transform takes the logarithm of (n-1)/(n+1), "
                "which is negative on (-1, 1); use corrected mode"
            )
        artanh = _clamped_artanh(atom.bound, epsilon)
        return Atom(atom.cmp, _affine_back(gamma, layer.bias, artanh, mode))
    raise DomainError(f"no backward transform for activation {activation!r}")


def _alpha(pred: Predicate, layer: LayerIR, gamma: np.ndarray, mode: str, epsilon: float) -> Predicate:
    if isinstance(pred, _TruePredicate):
        return TRUE
    if isinstance(pred, And):
        return And(
            _alpha(pred.left, layer, gamma, mode, epsilon),
            _alpha(pred.right, layer, gamma, mode, epsilon),
        )
    if isinstance(pred, Or):
        return Or(
            _alpha(pred.left, layer, gamma, mode, epsilon),
            _alpha(pred.right, layer, gamma, mode, epsilon),
        )
    if isinstance(pred, Atom):
        return _beta(layer, gamma, pred, mode, epsilon)
    raise TypeError(f"not a predicate node: {type(pred).__name__}")


def wp_layer(
    layer: LayerIR,
    pred: Predicate,
    mode: str = MODE_CORRECTED,
    epsilon: float = DEFAULT_EPSILON,
    rcond: float = DEFAULT_RCOND,
) -> Predicate:
    """Transform a predicate over the layer's output into one over its input.

    Distributes over conjunction and disjunction, maps TRUE to TRUE, and
    applies the activation-specific transform at each atom.
    """
    _check_mode(mode)
    gamma = pinv(layer.weights, rcond)
    return _alpha(pred, layer, gamma, mode, epsilon)


def beta_linear(layer: LayerIR, atom: Atom, mode: str = MODE_CORRECTED,
                rcond: float = DEFAULT_RCOND) -> Predicate:
    """Invert an affine layer: y cmp n becomes x cmp pinv(W) @ (n - b)."""
    _check_mode(mode)
    if layer.activation != "linear":
        raise ValueError(f"beta_linear called on a {layer.activation!r} layer")
    return _beta(layer, pinv(layer.weights, rcond), atom, mode, DEFAULT_EPSILON)


def beta_relu(layer: LayerIR, atom: Atom, mode: str = MODE_CORRECTED,
              rcond: float = DEFAULT_RCOND) -> Predicate:
    """Invert a relu layer: the affine conjunct plus the clamp conjunct pinv(W) @ (-b)."""
    _check_mode(mode)
    if layer.activation != "relu":
        raise ValueError(f"beta_relu called on a {layer.activation!r} layer")
    return _beta(layer, pinv(layer.weights, rcond), atom, mode, DEFAULT_EPSILON)


def beta_sigmoid(layer: LayerIR, atom: Atom, mode: str = MODE_CORRECTED,
                 epsilon: float = DEFAULT_EPSILON, rcond: float = DEFAULT_RCOND) -> Predicate:
    """Invert a sigmoid layer: bounds pass through the logit before the affine step."""
    _check_mode(mode)
    if layer.activation != "sigmoid":
        raise ValueError(f"beta_sigmoid called on a {layer.activation!r} layer")
    return _beta(layer, pinv(layer.weights, rcond), atom, mode, epsilon)


def beta_tanh(layer: LayerIR, atom: Atom, mode: str = MODE_CORRECTED,
              epsilon: float = DEFAULT_EPSILON, rcond: float = DEFAULT_RCOND) -> Predicate:
    """Invert a tanh layer: bounds pass through artanh before the affine step."""
    _check_mode(mode)
    if layer.activation != "tanh":
        raise ValueError(f"beta_tanh called on a {layer.activation!r} layer")
    return _beta(layer, pinv(layer.weights, rcond), atom, mode, epsilon)


def wp_network(
    model: ModelIR,
    post: Postcondition,
    mode: str = MODE_CORRECTED,
    epsilon: float = DEFAULT_EPSILON,
    rcond: float = DEFAULT_RCOND,
) -> Predicate:
    """Fold the postcondition backward from the last layer to the first.

    Returns a predicate whose atoms constrain the model's input vector.
    Raises DomainError when the postcondition cannot be pulled through the
    last activation (e.g. an interval outside (0, 1) for sigmoid).
    """
    _check_mode(mode)
    pred: Predicate = post.to_predicate(model.output_dim)
    # one pseudoinverse per layer; every atom at that depth reuses it
    for layer in reversed(model.layers):
        gamma = pinv(layer.weights, rcond)
        pred = _alpha(pred, layer, gamma, mode, epsilon)
    return pred


@dataclass(frozen=True)
class DataPrecondition:
    """Per-feature interval bounds on the model input, one interval per feature."""

    lo: np.ndarray
    hi: np.ndarray
    mode: str = MODE_CORRECTED
    post: tuple[float, float] | None = None

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatchError("lo and hi must be 1-D vectors of equal length")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n_features(self) -> int:
        return int(self.lo.shape[0])

    @property
    def feasible(self) -> np.ndarray:
        """Per-feature flag: lower bound does not exceed upper bound."""
        return self.lo <= self.hi

    def violations(self, rows) -> np.ndarray:
        """Boolean violation mask: entry is True where a value leaves its interval.

        Accepts a single row or a rows x features array. A feature with a
        crossed (infeasible) interval is violated by every value.
        """
        arr = np.asarray(rows, dtype=np.float64)
        if arr.shape[-1] != self.n_features:
            raise DimensionMismatchError(
                f"rows have width {arr.shape[-1]}, precondition has {self.n_features} features"
            )
        return (arr < self.lo) | (arr > self.hi)


def consolidate(pred: Predicate, input_dim: int, mode: str = MODE_CORRECTED,
                post: tuple[float, float] | None = None) -> DataPrecondition:
    """Flatten a predicate tree into one interval per input feature.

    Conjunction intersects intervals; disjunction takes the interval hull
    (the single interval covering both branches). Upper bounds come from
    <= and < atoms, lower bounds from >= and >. Equality atoms have no
    interval form and are rejected.
    """
    lo, hi = _interval_bounds(pred, input_dim)
    return DataPrecondition(lo=lo, hi=hi, mode=mode, post=post)


def _interval_bounds(pred: Predicate, width: int) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(pred, _TruePredicate):
        return np.full(width, -np.inf), np.full(width, np.inf)
    if isinstance(pred, Atom):
        if pred.arity != width:
            raise DimensionMismatchError(
                f"atom arity {pred.arity} != expected input width {width}"
            )
        if pred.cmp in _UPPER_CMPS:
            return np.full(width, -np.inf), pred.bound.astype(np.float64)
        if pred.cmp in _LOWER_CMPS:
            return pred.bound.astype(np.float64), np.full(width, np.inf)
        raise UnsupportedPredicateError(
            f"cannot consolidate a {pred.cmp.value!r} atom into interval bounds"
        )
    if isinstance(pred, And):
        lo_l, hi_l = _interval_bounds(pred.left, width)
        lo_r, hi_r = _interval_bounds(pred.right, width)
        return np.maximum(lo_l, lo_r), np.minimum(hi_l, hi_r)
    if isinstance(pred, Or):
        lo_l, hi_l = _interval_bounds(pred.left, width)
        lo_r, hi_r = _interval_bounds(pred.right, width)
        return np.minimum(lo_l, lo_r), np.maximum(hi_l, hi_r)
    raise TypeError(f"not a predicate node: {type(pred).__name__}")


def infer_precondition(
    model: ModelIR,
    post: Postcondition,
    mode: str = MODE_CORRECTED,
    epsilon: float = DEFAULT_EPSILON,
    rcond: float = DEFAULT_RCOND,
) -> DataPrecondition:
    """wp_network followed by consolidate; the usual entry point."""
    pred = wp_network(model, post, mode=mode, epsilon=epsilon, rcond=rcond)
    return consolidate(pred, model.input_dim, mode=mode, post=(post.low, post.high))


def _bound_to_json(value: float):
    if np.isposinf(value):
        return "inf"
    if np.isneginf(value):
        return "-inf"
    return float(value)


def _bound_from_json(value) -> float:
    if value == "inf":
        return np.inf
    if value == "-inf":
        return -np.inf
    return float(value)


def precondition_to_dict(pre: DataPrecondition) -> dict:
    feasible = pre.feasible
    return {
        "mode": pre.mode,
        "post": list(pre.post) if pre.post is not None else None,
        "features": [
            {
                "index": i,
                "lo": _bound_to_json(pre.lo[i]),
                "hi": _bound_to_json(pre.hi[i]),
                "feasible": bool(feasible[i]),
            }
            for i in range(pre.n_features)
        ],
    }


def precondition_from_dict(obj: dict) -> DataPrecondition:
    features = sorted(obj["features"], key=lambda f: f["index"])
    lo = np.array([_bound_from_json(f["lo"]) for f in features])
    hi = np.array([_bound_from_json(f["hi"]) for f in features])
    post = tuple(obj["post"]) if obj.get("post") is not None else None
    return DataPrecondition(lo=lo, hi=hi, mode=obj.get("mode", MODE_CORRECTED), post=post)


def save_precondition(pre: DataPrecondition, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(precondition_to_dict(pre), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_precondition(path) -> DataPrecondition:
    with open(path, "r", encoding="utf-8") as fh:
        return precondition_from_dict(json.load(fh))
