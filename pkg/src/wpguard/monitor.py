"""Deployment-time monitor: violation thresholds and per-row verdicts.

The monitor is calibrated once on a validation set: count, per feature, how
many validation rows fall outside the inferred input intervals, and take the
mean count as the violation threshold. At deployment each unseen row gets a
0/1 violation indicator per feature; features whose indicator exceeds the
normalized threshold rate are tallied as L, the rest as M, and a fixed
decision tree on (M, L) labels the model's prediction Correct, Incorrect, or
Uncertain.

The threshold comparison uses the violation *rate* (mean count divided by
validation size) rather than the raw mean count: the calibration statistic is
a whole-set quantity while deployment rows are single instances, and the rate
puts both on the same scale. A feature whose validation violation rate
reaches 1 can never land in L (the indicator never exceeds it); such a
feature is effectively ignored by the verdict.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DatasetFormatError,
    DimensionMismatchError,
    EmptyDatasetError,
)
from .model_ir import ModelIR
from .wp import (
    DEFAULT_EPSILON,
    MODE_CORRECTED,
    DataPrecondition,
    Postcondition,
    infer_precondition,
)
from .linalg import DEFAULT_RCOND


@dataclass
class Dataset:
    """Tabular data: named feature columns, float rows, optional 0/1 labels."""

    feature_names: list[str]
    rows: np.ndarray
    labels: np.ndarray | None = None

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.rows.shape[1])


def load_dataset(path, label_column: str | None = None) -> Dataset:
    """Read a header CSV; every non-label cell must parse as a decimal real.

    When label_column is given, that column is removed from the features and
    its values (which must be 0 or 1) become the labels.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}: no header row") from None
        header = [name.strip() for name in header]
        label_idx: int | None = None
        if label_column is not None:
            try:
                label_idx = header.index(label_column)
            except ValueError:
                raise DatasetFormatError(
                    f"{path}: label column {label_column!r} not in header {header}"
                ) from None
        feature_names = [name for i, name in enumerate(header) if i != label_idx]
        rows: list[list[float]] = []
        labels: list[int] = []
        for row_number, record in enumerate(reader):
            if not record or all(cell.strip() == "" for cell in record):
                continue
            if len(record) != len(header):
                raise DatasetFormatError(
                    f"{path}: row {row_number} has {len(record)} cells, header has {len(header)}"
                )
            values: list[float] = []
            for col, cell in enumerate(record):
                try:
                    value = float(cell)
                except ValueError:
                    raise DatasetFormatError(
                        f"{path}: row {row_number}, column {header[col]!r}: "
                        f"cannot parse {cell!r} as a real number"
                    ) from None
                if col == label_idx:
                    if value not in (0.0, 1.0):
                        raise DatasetFormatError(
                            f"{path}: row {row_number}, column {header[col]!r}: "
                            f"label must be 0 or 1, got {cell!r}"
                        )
                    labels.append(int(value))
                else:
                    values.append(value)
            rows.append(values)
    data = np.array(rows, dtype=np.float64) if rows else np.zeros((0, len(feature_names)))
    return Dataset(
        feature_names=feature_names,
        rows=data,
        labels=np.array(labels, dtype=np.int64) if label_idx is not None else None,
    )


def save_dataset(dataset: Dataset, path, label_column: str | None = None) -> None:
    """Write a header CSV; labels, when present, go in a trailing column."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = list(dataset.feature_names)
        with_labels = dataset.labels is not None and label_column is not None
        if with_labels:
            header.append(label_column)
        writer.writerow(header)
        for i in range(dataset.n_rows):
            record = [repr(float(v)) for v in dataset.rows[i]]
            if with_labels:
                record.append(str(int(dataset.labels[i])))
            writer.writerow(record)


@dataclass(frozen=True)
class ViolationProfile:
    """Validation-set violation counts per feature plus the mean threshold."""

    counts: np.ndarray
    n_validation: int
    threshold_V: float
    threshold_rate: float

    @classmethod
    def from_counts(cls, counts, n_validation: int) -> "ViolationProfile":
        arr = np.asarray(counts, dtype=np.int64)
        mean = float(arr.mean())
        return cls(
            counts=arr,
            n_validation=n_validation,
            threshold_V=mean,
            threshold_rate=mean / n_validation,
        )


class Outcome(enum.Enum):
    CORRECT = "Correct"
    INCORRECT = "Incorrect"
    UNCERTAIN = "Uncertain"


@dataclass(frozen=True)
class Verdict:
    """Trust label for one model prediction, with the tallies that produced it."""

    outcome: Outcome
    M: int
    L: int
    per_feature_violation: np.ndarray


def collect_feature_violations(data: Dataset, pre: DataPrecondition) -> np.ndarray:
    """Count, per feature, how many rows fall outside their interval."""
    if data.n_features != pre.n_features:
        raise DimensionMismatchError(
            f"dataset width {data.n_features} != precondition width {pre.n_features}"
        )
    if data.n_rows == 0:
        return np.zeros(data.n_features, dtype=np.int64)
    return pre.violations(data.rows).sum(axis=0).astype(np.int64)


def violation_satisfaction_totals(data: Dataset, pre: DataPrecondition) -> tuple[int, int]:
    """Total violated and total satisfied feature checks; they sum to rows x features."""
    violations = int(collect_feature_violations(data, pre).sum())
    return violations, data.n_rows * data.n_features - violations


def compute_threshold(
    model: ModelIR,
    validation: Dataset,
    post: Postcondition,
    mode: str = MODE_CORRECTED,
    epsilon: float = DEFAULT_EPSILON,
    rcond: float = DEFAULT_RCOND,
) -> tuple[ViolationProfile, DataPrecondition]:
    """Infer the input intervals once and calibrate the violation threshold."""
    if validation.n_rows == 0:
        raise EmptyDatasetError("validation dataset has no rows")
    if validation.n_features != model.input_dim:
        raise DimensionMismatchError(
            f"validation width {validation.n_features} != model input_dim {model.input_dim}"
        )
    pre = infer_precondition(model, post, mode=mode, epsilon=epsilon, rcond=rcond)
    counts = collect_feature_violations(validation, pre)
    return ViolationProfile.from_counts(counts, validation.n_rows), pre


def decision_tree(M: int, L: int) -> Outcome:
    """Map the above/below-threshold tallies to a verdict.

    No feature above threshold: Correct. Equal split: Uncertain. Fewer above
    than below: Correct. More above than below: Incorrect.
    """
    if M < 0 or L < 0:
        raise ValueError("tallies must be non-negative")
    if L == 0:
        return Outcome.CORRECT
    if L == M:
        return Outcome.UNCERTAIN
    if L < M:
        return Outcome.CORRECT
    return Outcome.INCORRECT


def check_prediction(row, profile: ViolationProfile, pre: DataPrecondition) -> Verdict:
    """Verdict for a single unseen row."""
    arr = np.asarray(row, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != pre.n_features:
        raise DimensionMismatchError(
            f"row has shape {arr.shape}, precondition has {pre.n_features} features"
        )
    violated = pre.violations(arr)
    above = violated > profile.threshold_rate
    L = int(above.sum())
    M = pre.n_features - L
    return Verdict(
        outcome=decision_tree(M, L),
        M=M,
        L=L,
        per_feature_violation=violated,
    )


def check_batch(data: Dataset, profile: ViolationProfile, pre: DataPrecondition) -> list[Verdict]:
    """Independent verdict per row, in input order."""
    if data.n_features != pre.n_features:
        raise DimensionMismatchError(
            f"dataset width {data.n_features} != precondition width {pre.n_features}"
        )
    verdicts = []
    violated_rows = pre.violations(data.rows) if data.n_rows else np.zeros((0, pre.n_features), bool)
    for i in range(data.n_rows):
        violated = violated_rows[i]
        L = int((violated > profile.threshold_rate).sum())
        M = pre.n_features - L
        verdicts.append(
            Verdict(outcome=decision_tree(M, L), M=M, L=L, per_feature_violation=violated)
        )
    return verdicts


def verdict_counts(verdicts: list[Verdict]) -> dict[str, int]:
    counts = {outcome.value: 0 for outcome in Outcome}
    for verdict in verdicts:
        counts[verdict.outcome.value] += 1
    return counts


VERDICT_CSV_HEADER = ["row_index", "outcome", "M", "L", "violated_features"]


def write_verdicts_csv(verdicts: list[Verdict], path) -> None:
    """One line per row: row_index, outcome, M, L, ';'-joined violated feature indices."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(VERDICT_CSV_HEADER)
        for i, verdict in enumerate(verdicts):
            violated = ";".join(
                str(j) for j in np.flatnonzero(verdict.per_feature_violation)
            )
            writer.writerow([i, verdict.outcome.value, verdict.M, verdict.L, violated])


def profile_to_dict(profile: ViolationProfile) -> dict:
    return {
        "counts": profile.counts.tolist(),
        "n_validation": profile.n_validation,
        "threshold_V": profile.threshold_V,
        "threshold_rate": profile.threshold_rate,
    }


def profile_from_dict(obj: dict) -> ViolationProfile:
    return ViolationProfile(
        counts=np.asarray(obj["counts"], dtype=np.int64),
        n_validation=int(obj["n_validation"]),
        threshold_V=float(obj["threshold_V"]),
        threshold_rate=float(obj["threshold_rate"]),
    )


def save_profile(profile: ViolationProfile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(profile_to_dict(profile), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_profile(path) -> ViolationProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return profile_from_dict(json.load(fh))
