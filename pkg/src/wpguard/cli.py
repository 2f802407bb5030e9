"""Command-line pipeline: infer, threshold, check, eval, run, predict.

Every subcommand works from raw file inputs (model JSON plus CSV datasets)
and writes its artifacts into --out with fixed names, so identical inputs
produce byte-identical precondition/profile/verdict files. Exit codes:
0 success, 1 usage error, 2 data or domain error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, WpguardError
from .forward import forward_batch, predict_labels
from .linalg import DEFAULT_RCOND
from .metrics import UNDEFINED, confusion, ground_truth, pearson, pearson_p_value
from .model_ir import ModelIR, load_model
from .monitor import (
    Dataset,
    check_batch,
    compute_threshold,
    load_dataset,
    save_profile,
    verdict_counts,
    write_verdicts_csv,
)
from .wp import (
    DEFAULT_EPSILON,
    MODE_CORRECTED,
    MODES,
    Postcondition,
    infer_precondition,
    save_precondition,
)

PRECONDITION_FILE = "precondition.json"
PROFILE_FILE = "profile.json"
VERDICTS_FILE = "verdicts.csv"
METRICS_JSON_FILE = "metrics.json"
METRICS_TEXT_FILE = "metrics.txt"
PREDICTIONS_FILE = "predictions.csv"


@dataclass
class RunConfig:
    model_path: str
    validation_path: str | None = None
    unseen_path: str | None = None
    post_low: float = 0.95
    post_high: float = 0.99
    mode: str = MODE_CORRECTED
    label_column: str | None = None
    epsilon: float = DEFAULT_EPSILON
    rcond: float = DEFAULT_RCOND
    output_dir: str = "."
    figures: bool = True

    def __post_init__(self):
        if self.epsilon <= 0:
            raise WpguardError(f"epsilon must be positive, got {self.epsilon}")
        if self.rcond <= 0:
            raise WpguardError(f"rcond must be positive, got {self.rcond}")

    @property
    def post(self) -> Postcondition:
        return Postcondition(low=self.post_low, high=self.post_high)

    @property
    def out(self) -> Path:
        path = Path(self.output_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path


def _load_model(config: RunConfig) -> ModelIR:
    return load_model(config.model_path)


def _load_with_optional_label(path, label_column: str | None) -> Dataset:
    # strip the label column when the file has one; datasets without labels
    # still load (labels are only demanded where ground truth is needed)
    if label_column is not None:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            header = next(csv.reader(fh), [])
        if label_column in [name.strip() for name in header]:
            return load_dataset(path, label_column=label_column)
    return load_dataset(path)


def _load_validation(config: RunConfig) -> Dataset:
    if config.validation_path is None:
        raise WpguardError("a validation dataset is required")
    return _load_with_optional_label(config.validation_path, config.label_column)


def _load_unseen(config: RunConfig) -> Dataset:
    if config.unseen_path is None:
        raise WpguardError("an unseen dataset is required")
    return _load_with_optional_label(config.unseen_path, config.label_column)


def _format_bound(value: float) -> str:
    if np.isneginf(value):
        return "-inf"
    if np.isposinf(value):
        return "inf"
    return f"{value:.6g}"


def cmd_infer(config: RunConfig) -> dict:
    """Infer per-feature input intervals and write precondition.json."""
    model = _load_model(config)
    pre = infer_precondition(
        model, config.post, mode=config.mode, epsilon=config.epsilon, rcond=config.rcond
    )
    path = config.out / PRECONDITION_FILE
    save_precondition(pre, path)
    feasible = pre.feasible
    for i in range(pre.n_features):
        marker = "" if feasible[i] else "  (infeasible)"
        print(f"feature {i}: [{_format_bound(pre.lo[i])}, {_format_bound(pre.hi[i])}]{marker}")
    print(f"wrote {path}")
    return {"precondition": pre, "path": path}


def cmd_threshold(config: RunConfig) -> dict:
    """Calibrate the violation threshold on the validation set; write profile.json."""
    model = _load_model(config)
    validation = _load_validation(config)
    profile, pre = compute_threshold(
        model, validation, config.post,
        mode=config.mode, epsilon=config.epsilon, rcond=config.rcond,
    )
    path = config.out / PROFILE_FILE
    save_profile(profile, path)
    print(
        f"validation rows={profile.n_validation} "
        f"threshold_V={profile.threshold_V:.6g} rate={profile.threshold_rate:.6g}"
    )
    print(f"wrote {path}")
    return {"profile": profile, "precondition": pre, "path": path}


def cmd_check(config: RunConfig) -> dict:
    """Produce a verdict per unseen row; write verdicts.csv."""
    model = _load_model(config)
    validation = _load_validation(config)
    unseen = _load_unseen(config)
    profile, pre = compute_threshold(
        model, validation, config.post,
        mode=config.mode, epsilon=config.epsilon, rcond=config.rcond,
    )
    started = time.perf_counter()
    verdicts = check_batch(unseen, profile, pre)
    check_seconds = time.perf_counter() - started
    path = config.out / VERDICTS_FILE
    write_verdicts_csv(verdicts, path)
    counts = verdict_counts(verdicts)
    print(
        f"correct={counts['Correct']}, incorrect={counts['Incorrect']}, "
        f"uncertain={counts['Uncertain']}"
    )
    print(f"wrote {path}")
    return {
        "model": model,
        "verdicts": verdicts,
        "counts": counts,
        "profile": profile,
        "precondition": pre,
        "unseen": unseen,
        "check_seconds": check_seconds,
        "path": path,
    }


def cmd_eval(config: RunConfig) -> dict:
    """Score verdicts against ground truth; write metrics.json/.txt and figures."""
    if config.label_column is None:
        raise WpguardError("eval needs --label-column to derive ground truth")
    check_result = cmd_check(config)
    unseen: Dataset = check_result["unseen"]
    if unseen.labels is None:
        raise WpguardError(f"unseen dataset {config.unseen_path} carries no labels")
    model = check_result["model"]
    predicted = predict_labels(model, unseen.rows)
    truth = ground_truth(predicted, unseen.labels)
    verdicts = check_result["verdicts"]
    report = confusion(verdicts, truth)

    violated_rows = np.array([v.per_feature_violation.any() for v in verdicts], dtype=float)
    mispredicted = (~truth).astype(float)
    try:
        pcc = pearson(violated_rows, mispredicted)
        pcc_p = pearson_p_value(pcc, len(verdicts))
    except DegenerateInputError:
        pcc, pcc_p = None, None

    payload = report.to_dict()
    payload["pcc_violation_misprediction"] = UNDEFINED if pcc is None else pcc
    payload["pcc_p_value"] = UNDEFINED if pcc_p is None else pcc_p
    payload["verdict_counts"] = check_result["counts"]
    payload["n_rows"] = unseen.n_rows
    payload["check_seconds"] = check_result["check_seconds"]

    json_path = config.out / METRICS_JSON_FILE
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    text_path = config.out / METRICS_TEXT_FILE
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write(report.to_text())

    figure_paths = []
    if config.figures:
        from .report import render_report_figures  # matplotlib loads only when needed

        figure_paths = render_report_figures(
            config.out,
            profile=check_result["profile"],
            feature_names=unseen.feature_names,
            counts=check_result["counts"],
            report=report,
        )

    print(report.to_text(), end="")
    print(f"wrote {json_path}, {text_path}" + (
        f" and {len(figure_paths)} figures" if figure_paths else ""
    ))
    return {**check_result, "report": report, "metrics_path": json_path}


def cmd_run(config: RunConfig) -> dict:
    """Full pipeline with stage timings: infer, threshold, check, eval."""
    timings: dict[str, float] = {}

    started = time.perf_counter()
    model = _load_model(config)
    pre = infer_precondition(
        model, config.post, mode=config.mode, epsilon=config.epsilon, rcond=config.rcond
    )
    save_precondition(pre, config.out / PRECONDITION_FILE)
    timings["infer"] = time.perf_counter() - started

    started = time.perf_counter()
    validation = _load_validation(config)
    profile, _ = compute_threshold(
        model, validation, config.post,
        mode=config.mode, epsilon=config.epsilon, rcond=config.rcond,
    )
    save_profile(profile, config.out / PROFILE_FILE)
    timings["threshold"] = time.perf_counter() - started

    started = time.perf_counter()
    unseen = _load_unseen(config)
    verdicts = check_batch(unseen, profile, pre)
    write_verdicts_csv(verdicts, config.out / VERDICTS_FILE)
    counts = verdict_counts(verdicts)
    timings["check"] = time.perf_counter() - started

    report = None
    if config.label_column is not None and unseen.labels is not None:
        started = time.perf_counter()
        predicted = predict_labels(model, unseen.rows)
        truth = ground_truth(predicted, unseen.labels)
        report = confusion(verdicts, truth)
        violated_rows = np.array([v.per_feature_violation.any() for v in verdicts], dtype=float)
        try:
            pcc = pearson(violated_rows, (~truth).astype(float))
            pcc_p = pearson_p_value(pcc, len(verdicts))
        except DegenerateInputError:
            pcc, pcc_p = None, None
        payload = report.to_dict()
        payload["pcc_violation_misprediction"] = UNDEFINED if pcc is None else pcc
        payload["pcc_p_value"] = UNDEFINED if pcc_p is None else pcc_p
        payload["verdict_counts"] = counts
        payload["n_rows"] = unseen.n_rows
        payload["check_seconds"] = timings["check"]
        with open(config.out / METRICS_JSON_FILE, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(config.out / METRICS_TEXT_FILE, "w", encoding="utf-8") as fh:
            fh.write(report.to_text())
        if config.figures:
            from .report import render_report_figures

            render_report_figures(
                config.out,
                profile=profile,
                feature_names=unseen.feature_names,
                counts=counts,
                report=report,
            )
        timings["eval"] = time.perf_counter() - started

    print(
        f"correct={counts['Correct']}, incorrect={counts['Incorrect']}, "
        f"uncertain={counts['Uncertain']}"
    )
    for stage, seconds in timings.items():
        print(f"{stage}: {seconds:.3f}s")
    return {
        "timings": timings,
        "counts": counts,
        "verdicts": verdicts,
        "profile": profile,
        "precondition": pre,
        "report": report,
    }


def cmd_predict(config: RunConfig) -> dict:
    """Run the forward pass over a dataset and write raw outputs plus labels."""
    model = _load_model(config)
    data = _load_with_optional_label(config.unseen_path, config.label_column)
    if data.n_features != model.input_dim:
        raise WpguardError(
            f"dataset width {data.n_features} != model input_dim {model.input_dim}"
        )
    outputs = forward_batch(model, data.rows)
    labels = (outputs[:, 0] >= 0.5).astype(int)
    path = config.out / PREDICTIONS_FILE
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["row_index"] + [f"y{i}" for i in range(outputs.shape[1])] + ["label"]
        )
        for i in range(outputs.shape[0]):
            writer.writerow([i] + [repr(float(v)) for v in outputs[i]] + [int(labels[i])])
    print(f"wrote {path} ({outputs.shape[0]} rows)")
    return {"outputs": outputs, "path": path}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this toolkit reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="wpguard", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = _Parser(add_help=False)
    common.add_argument("--model", required=True, help="model interchange JSON file")
    common.add_argument("--post-low", type=float, default=0.95,
                        help="lower end of the output interval (default 0.95)")
    common.add_argument("--post-high", type=float, default=0.99,
                        help="upper end of the output interval (default 0.99)")
    common.add_argument("--mode", choices=MODES, default=MODE_CORRECTED)
    common.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                        help="clamp width for invertible activation bounds")
    common.add_argument("--rcond", type=float, default=DEFAULT_RCOND,
                        help="singular value cutoff for the pseudoinverse")
    common.add_argument("--out", default=".", help="output directory")

    datasets = _Parser(add_help=False)
    datasets.add_argument("--validation", required=True, help="validation CSV")
    datasets.add_argument("--unseen", required=True, help="unseen CSV")
    datasets.add_argument("--label-column", default=None,
                          help="label column name, excluded from features")

    sub.add_parser("infer", parents=[common],
                   help="infer per-feature input intervals")

    threshold = sub.add_parser("threshold", parents=[common],
                               help="calibrate the violation threshold")
    threshold.add_argument("--validation", required=True)
    threshold.add_argument("--label-column", default=None)

    sub.add_parser("check", parents=[common, datasets],
                   help="verdict per unseen row")

    evaluate = sub.add_parser("eval", parents=[common, datasets],
                              help="score verdicts against ground truth")
    evaluate.add_argument("--no-figures", action="store_true",
                          help="skip figure rendering")

    run = sub.add_parser("run", parents=[common, datasets],
                         help="full pipeline with stage timings")
    run.add_argument("--no-figures", action="store_true")

    predict = sub.add_parser("predict", parents=[common],
                             help="raw forward-pass outputs for a dataset")
    predict.add_argument("--data", required=True, help="input CSV")
    predict.add_argument("--label-column", default=None)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        model_path=args.model,
        validation_path=getattr(args, "validation", None),
        unseen_path=getattr(args, "unseen", None) or getattr(args, "data", None),
        post_low=args.post_low,
        post_high=args.post_high,
        mode=args.mode,
        label_column=getattr(args, "label_column", None),
        epsilon=args.epsilon,
        rcond=args.rcond,
        output_dir=args.out,
        figures=not getattr(args, "no_figures", False),
    )


_COMMANDS = {
    "infer": cmd_infer,
    "threshold": cmd_threshold,
    "check": cmd_check,
    "eval": cmd_eval,
    "run": cmd_run,
    "predict": cmd_predict,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _config_from_args(args)
        _COMMANDS[args.command](config)
    except WpguardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
