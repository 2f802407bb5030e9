"""Scoring of monitor verdicts against ground truth.

The positive class is "the monitor says the prediction is trustworthy"
(verdict Correct). Uncertain verdicts count as Incorrect when scoring. Ratios
with a zero denominator are reported as the marker '-' instead of 0 or NaN so
degenerate runs are visible in the output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError
from .monitor import Outcome, Verdict

UNDEFINED = "-"


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float | None
    recall: float | None
    accuracy: float | None
    tpr: float | None
    fpr: float | None
    f1: float | None

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> dict:
        def cell(value):
            return UNDEFINED if value is None else value

        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "precision": cell(self.precision),
            "recall": cell(self.recall),
            "accuracy": cell(self.accuracy),
            "tpr": cell(self.tpr),
            "fpr": cell(self.fpr),
            "f1": cell(self.f1),
        }

    def to_text(self) -> str:
        """Aligned two-column table."""
        entries = list(self.to_dict().items())
        width = max(len(key) for key, _ in entries)
        lines = []
        for key, value in entries:
            if isinstance(value, float):
                value = f"{value:.4f}"
            lines.append(f"{key.ljust(width)}  {value}")
        return "\n".join(lines) + "\n"


def _ratio(numerator: int, denominator: int) -> float | None:
    return numerator / denominator if denominator > 0 else None


def confusion_from_counts(tp: int, fp: int, fn: int, tn: int) -> MetricsReport:
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricsReport(
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        precision=precision,
        recall=recall,
        accuracy=_ratio(tp + tn, tp + fp + fn + tn),
        tpr=recall,
        fpr=_ratio(fp, fp + tn),
        f1=f1,
    )


def confusion(verdicts: list[Verdict], model_correct) -> MetricsReport:
    """Cross-tabulate verdicts against whether the model's prediction was right.

    TP: verdict Correct and the model was right. FP: verdict Correct and the
    model was wrong. FN and TN are the Incorrect/Uncertain counterparts.
    """
    truth = np.asarray(model_correct, dtype=bool)
    if truth.ndim != 1 or truth.shape[0] != len(verdicts):
        raise DimensionMismatchError(
            f"{len(verdicts)} verdicts but {truth.shape} ground-truth entries"
        )
    said_correct = np.array([v.outcome is Outcome.CORRECT for v in verdicts])
    tp = int(np.sum(said_correct & truth))
    fp = int(np.sum(said_correct & ~truth))
    fn = int(np.sum(~said_correct & truth))
    tn = int(np.sum(~said_correct & ~truth))
    return confusion_from_counts(tp, fp, fn, tn)


def ground_truth(predicted_labels, actual_labels) -> np.ndarray:
    """Bit vector: model's predicted label equals the actual label."""
    predicted = np.asarray(predicted_labels)
    actual = np.asarray(actual_labels)
    if predicted.shape != actual.shape:
        raise DimensionMismatchError(
            f"predicted labels {predicted.shape} vs actual labels {actual.shape}"
        )
    return predicted == actual


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise DimensionMismatchError(f"mismatched shapes {x.shape} vs {y.shape}")
    if x.shape[0] < 2:
        raise DegenerateInputError("need at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        raise DegenerateInputError("zero variance in at least one argument")
    return float(dx @ dy) / denom


def _betacf(a: float, b: float, x: float) -> float:
    # continued fraction for the regularized incomplete beta (Lentz's method)
    max_iter = 300
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-12:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: int) -> float:
    """Two-sided p-value for a t statistic with df degrees of freedom."""
    if df < 1:
        raise DegenerateInputError("degrees of freedom must be positive")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return betainc_reg(df / 2.0, 0.5, x)


def pearson_p_value(r: float, n: int) -> float:
    """Two-sided significance of a correlation from n paired observations."""
    if n < 3:
        raise DegenerateInputError("need at least three observations for a p-value")
    if not -1.0 <= r <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {r}")
    if abs(r) == 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return t_two_sided_p(t, n - 2)
