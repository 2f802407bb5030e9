import os

# pin BLAS pools before numpy loads anywhere; the perf criterion is single-threaded
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

import numpy as np
import pytest

from wpguard import LayerIR, ModelIR


def make_layer(weights, bias, activation) -> LayerIR:
    return LayerIR(
        weights=np.asarray(weights, dtype=np.float64),
        bias=np.asarray(bias, dtype=np.float64),
        activation=activation,
    )


def make_model(layer_specs, name="test") -> ModelIR:
    """layer_specs: iterable of (weights, bias, activation)."""
    layers = tuple(make_layer(*spec) for spec in layer_specs)
    return ModelIR(input_dim=layers[0].in_dim, layers=layers, name=name)


def make_chain_model(dims, activations, seed=0, scale=0.5) -> ModelIR:
    """Random dense chain: dims = (in, h1, ..., out), one activation per layer."""
    rng = np.random.default_rng(seed)
    specs = []
    for k, activation in enumerate(activations):
        out_dim, in_dim = dims[k + 1], dims[k]
        specs.append((
            rng.normal(scale=scale / np.sqrt(in_dim), size=(out_dim, in_dim)),
            rng.normal(scale=0.1, size=out_dim),
            activation,
        ))
    return make_model(specs, name=f"chain-{'-'.join(map(str, dims))}")


@pytest.fixture
def identity_sigmoid_model() -> ModelIR:
    return make_model([([[1.0]], [0.0], "sigmoid")], name="identity-sigmoid")


@pytest.fixture
def identity_linear_model() -> ModelIR:
    return make_model([([[1.0]], [0.0], "linear")], name="identity-linear")


@pytest.fixture
def wide_3layer_model() -> ModelIR:
    """8 -> 12 -> 8 -> 1, linear/linear/sigmoid, fixed weights."""
    return make_chain_model((8, 12, 8, 1), ("linear", "linear", "sigmoid"), seed=7)


def write_csv(path, feature_names, rows, labels=None, label_column="label"):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = list(feature_names) + ([label_column] if labels is not None else [])
        writer.writerow(header)
        for i, row in enumerate(rows):
            record = [repr(float(v)) for v in row]
            if labels is not None:
                record.append(str(int(labels[i])))
            writer.writerow(record)
    return path


# ---------------------------------------------------------------------------
# Synthetic end-to-end scenario: a confident two-feature model whose
# predictions are right on the in-distribution box [0, 0.5]^2 and wrong on a
# far-away slice. The output stays inside [0.95, 0.99] exactly on the box, so
# the inferred intervals cover the box and exclude the slice.
# ---------------------------------------------------------------------------

def count_roundtrip_mismatches(model, post_low, post_high, grid_axes, slack=1e-9):
    """Grid points where output-interval membership and inferred-interval
    membership disagree beyond a slack band around either boundary."""
    from wpguard import Postcondition, forward_batch, infer_precondition

    pre = infer_precondition(model, Postcondition(post_low, post_high))
    mesh = np.meshgrid(*grid_axes, indexing="ij")
    rows = np.column_stack([m.ravel() for m in mesh])
    y = forward_batch(model, rows)
    in_post = np.all((y >= post_low - slack) & (y <= post_high + slack), axis=1)
    in_post_strict = np.all((y >= post_low + slack) & (y <= post_high - slack), axis=1)
    in_pre = np.all((rows >= pre.lo - slack) & (rows <= pre.hi + slack), axis=1)
    in_pre_strict = np.all((rows >= pre.lo + slack) & (rows <= pre.hi - slack), axis=1)
    mismatch = (in_post_strict & ~in_pre) | (in_pre_strict & ~in_post)
    return int(mismatch.sum())


SYNTH_POST = (0.95, 0.99)


def synthetic_model() -> ModelIR:
    return make_model(
        [
            ([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], "linear"),
            ([[1.0, 1.0]], [3.2], "sigmoid"),
        ],
        name="synthetic-2layer",
    )


def synthetic_validation(n=60):
    x0 = np.linspace(0.0, 0.5, n)
    x1 = np.linspace(0.5, 0.0, n)
    return np.column_stack([x0, x1])


def synthetic_unseen(n_in=40, n_out=10):
    """In-distribution rows (true label 1) then an OOD slice (true label 0)."""
    x0_in = np.linspace(0.01, 0.49, n_in)
    x1_in = np.linspace(0.49, 0.01, n_in)
    rows_in = np.column_stack([x0_in, x1_in])
    x0_out = np.linspace(1.5, 2.5, n_out)
    x1_out = np.linspace(3.0, 4.0, n_out)
    rows_out = np.column_stack([x0_out, x1_out])
    rows = np.vstack([rows_in, rows_out])
    labels = np.concatenate([np.ones(n_in, dtype=int), np.zeros(n_out, dtype=int)])
    return rows, labels
