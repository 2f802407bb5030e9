"""wpguard: backward input-bounds inference and prediction monitoring for dense networks.

Pipeline in one paragraph: load a trained fully-connected model from the JSON
interchange format, push an output interval backward through the layers (via
activation inverses and weight-matrix pseudoinverses) to get per-feature
input intervals, calibrate a violation threshold on a validation set, then
label each unseen row's model prediction Correct, Incorrect, or Uncertain
and score those verdicts against ground truth.
"""

from .errors import (
    DatasetFormatError,
    DegenerateInputError,
    DimensionMismatchError,
    DomainError,
    EmptyDatasetError,
    ModeError,
    ModelDimensionError,
    ModelFormatError,
    ModelParseError,
    ModelSchemaError,
    UnsupportedPredicateError,
    WpguardError,
)
from .forward import Prediction, forward, forward_batch, predict, predict_label, predict_labels
from .linalg import DEFAULT_RCOND, matvec, pinv, svd
from .metrics import (
    MetricsReport,
    confusion,
    confusion_from_counts,
    ground_truth,
    pearson,
    pearson_p_value,
)
from .model_ir import ACTIVATIONS, LayerIR, ModelIR, load_model, save_model, validate_dims
from .monitor import (
    Dataset,
    Outcome,
    Verdict,
    ViolationProfile,
    check_batch,
    check_prediction,
    collect_feature_violations,
    compute_threshold,
    decision_tree,
    load_dataset,
    load_profile,
    save_dataset,
    save_profile,
    verdict_counts,
    violation_satisfaction_totals,
    write_verdicts_csv,
)
from .wp import (
    DEFAULT_EPSILON,
    MODE_CORRECTED,
    MODE_PAPER_LITERAL,
    MODES,
    TRUE,
    And,
    Atom,
    Cmp,
    DataPrecondition,
    Or,
    Postcondition,
    Predicate,
    beta_linear,
    beta_relu,
    beta_sigmoid,
    beta_tanh,
    consolidate,
    infer_precondition,
    iter_atoms,
    load_precondition,
    predicate_equal,
    save_precondition,
    wp_layer,
    wp_network,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
