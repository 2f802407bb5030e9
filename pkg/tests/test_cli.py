"""End-to-end subcommand tests: artifacts, exit codes, determinism."""

import json
import re

import numpy as np
import pytest

from wpguard import forward_batch, load_model, save_model
from wpguard.cli import main
from conftest import (
    SYNTH_POST,
    make_model,
    synthetic_model,
    synthetic_unseen,
    synthetic_validation,
    write_csv,
)

LN9 = 2.1972245773362196


@pytest.fixture
def identity_sigmoid_file(tmp_path):
    model = make_model([([[1.0]], [0.0], "sigmoid")], name="identity-sigmoid")
    path = tmp_path / "identity.json"
    save_model(model, path)
    return path


@pytest.fixture
def square_model_file(tmp_path):
    model = make_model([(np.eye(2), np.zeros(2), "linear")], name="unit-square")
    path = tmp_path / "square.json"
    save_model(model, path)
    return path


@pytest.fixture
def four_row_csv(tmp_path):
    rows = [[0.5, 0.5], [2.0, 0.5], [2.0, 2.0], [0.5, 2.0]]
    return write_csv(tmp_path / "four.csv", ["a", "b"], rows)


@pytest.fixture
def synth_files(tmp_path):
    model_path = tmp_path / "synthetic.json"
    save_model(synthetic_model(), model_path)
    validation_path = write_csv(tmp_path / "validation.csv", ["x0", "x1"],
                                synthetic_validation())
    rows, labels = synthetic_unseen()
    unseen_path = write_csv(tmp_path / "unseen.csv", ["x0", "x1"], rows, labels=labels)
    return model_path, validation_path, unseen_path


class TestInfer:
    def test_identity_sigmoid(self, identity_sigmoid_file, tmp_path, capsys):
        out = tmp_path / "out"
        code = main([
            "infer", "--model", str(identity_sigmoid_file),
            "--post-low", "0.5", "--post-high", "0.9", "--out", str(out),
        ])
        assert code == 0
        obj = json.loads((out / "precondition.json").read_text())
        assert obj["post"] == [0.5, 0.9]
        feature = obj["features"][0]
        assert feature["lo"] == pytest.approx(0.0, abs=1e-12)
        assert feature["hi"] == pytest.approx(LN9, abs=1e-6)
        assert "feature 0" in capsys.readouterr().out

    def test_tanh_domain_error_exits_2(self, tmp_path, capsys):
        model_path = tmp_path / "tanh.json"
        save_model(make_model([([[1.0]], [0.0], "tanh")]), model_path)
        code = main([
            "infer", "--model", str(model_path),
            "--post-low", "2", "--post-high", "3", "--out", str(tmp_path / "out"),
        ])
        assert code == 2
        assert "outside" in capsys.readouterr().err

    def test_eight_feature_model_emits_eight_intervals(self, tmp_path, capsys):
        from conftest import make_chain_model

        model_path = tmp_path / "funnel.json"
        save_model(make_chain_model((8, 12, 8, 1), ("linear", "linear", "sigmoid"),
                                    seed=7), model_path)
        code = main(["infer", "--model", str(model_path), "--out", str(tmp_path / "out")])
        assert code == 0
        lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("feature ")]
        assert len(lines) == 8

    def test_missing_model_flag_is_usage_error(self, capsys):
        code = main(["infer", "--out", "somewhere"])
        assert code == 1

    def test_mode_flag_recorded_and_zero_bias_modes_agree(self, tmp_path):
        model_path = tmp_path / "zero-bias.json"
        save_model(make_model([([[2.0, 0.0], [0.0, 4.0]], [0.0, 0.0], "linear"),
                               ([[1.0, 1.0]], [0.0], "sigmoid")]), model_path)
        features = {}
        for mode in ("corrected", "paper-literal"):
            out = tmp_path / mode
            assert main(["infer", "--model", str(model_path), "--mode", mode,
                         "--out", str(out)]) == 0
            obj = json.loads((out / "precondition.json").read_text())
            assert obj["mode"] == mode
            features[mode] = obj["features"]
        assert features["corrected"] == features["paper-literal"]


class TestThreshold:
    def test_four_row_validation(self, square_model_file, four_row_csv, tmp_path):
        out = tmp_path / "out"
        code = main([
            "threshold", "--model", str(square_model_file),
            "--validation", str(four_row_csv),
            "--post-low", "0", "--post-high", "1", "--out", str(out),
        ])
        assert code == 0
        obj = json.loads((out / "profile.json").read_text())
        assert obj["threshold_V"] == 2.0
        assert obj["threshold_rate"] == 0.5
        assert obj["counts"] == [2, 2]

    def test_empty_validation_exits_2(self, square_model_file, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text("a,b\n")
        code = main([
            "threshold", "--model", str(square_model_file),
            "--validation", str(empty), "--out", str(tmp_path / "out"),
        ])
        assert code == 2
        assert "no rows" in capsys.readouterr().err


class TestCheck:
    def test_four_row_unseen(self, square_model_file, four_row_csv, tmp_path, capsys):
        out = tmp_path / "out"
        code = main([
            "check", "--model", str(square_model_file),
            "--validation", str(four_row_csv), "--unseen", str(four_row_csv),
            "--post-low", "0", "--post-high", "1", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "verdicts.csv").read_text().splitlines()
        assert lines[0] == "row_index,outcome,M,L,violated_features"
        assert len(lines) == 5
        assert lines[1].startswith("0,Correct,2,0,")
        summary = capsys.readouterr().out.splitlines()[0]
        assert re.fullmatch(r"correct=\d+, incorrect=\d+, uncertain=\d+", summary)

    def test_summary_parts_sum_to_row_count(self, square_model_file, four_row_csv,
                                            tmp_path, capsys):
        rng = np.random.default_rng(23)
        unseen = write_csv(tmp_path / "unseen153.csv", ["a", "b"],
                           rng.uniform(-1.0, 2.0, size=(153, 2)))
        code = main([
            "check", "--model", str(square_model_file),
            "--validation", str(four_row_csv), "--unseen", str(unseen),
            "--post-low", "0", "--post-high", "1", "--out", str(tmp_path / "out"),
        ])
        assert code == 0
        summary = capsys.readouterr().out.splitlines()[0]
        parts = [int(x) for x in re.findall(r"=(\d+)", summary)]
        assert sum(parts) == 153


class TestEval:
    def test_synthetic_scenario_metrics(self, synth_files, tmp_path, capsys):
        model_path, validation_path, unseen_path = synth_files
        out = tmp_path / "out"
        code = main([
            "eval", "--model", str(model_path),
            "--validation", str(validation_path), "--unseen", str(unseen_path),
            "--label-column", "label",
            "--post-low", str(SYNTH_POST[0]), "--post-high", str(SYNTH_POST[1]),
            "--out", str(out),
        ])
        assert code == 0
        payload = json.loads((out / "metrics.json").read_text())
        assert payload["tp"] == 40
        assert payload["fp"] == 0
        assert payload["fn"] == 0
        assert payload["tn"] == 10
        assert payload["precision"] == 1.0
        assert payload["recall"] == 1.0
        assert payload["f1"] == 1.0
        assert payload["pcc_violation_misprediction"] == pytest.approx(1.0)
        assert payload["check_seconds"] >= 0
        assert (out / "metrics.txt").exists()
        for figure in ("violations_per_feature.png", "verdict_distribution.png",
                       "confusion_matrix.png"):
            assert (out / figure).stat().st_size > 0

    def test_eval_without_labels_exits_2(self, square_model_file, four_row_csv,
                                         tmp_path, capsys):
        code = main([
            "eval", "--model", str(square_model_file),
            "--validation", str(four_row_csv), "--unseen", str(four_row_csv),
            "--post-low", "0", "--post-high", "1", "--out", str(tmp_path / "out"),
        ])
        assert code == 2


class TestRun:
    def test_all_artifacts_and_timings(self, synth_files, tmp_path, capsys):
        model_path, validation_path, unseen_path = synth_files
        out = tmp_path / "out"
        code = main([
            "run", "--model", str(model_path),
            "--validation", str(validation_path), "--unseen", str(unseen_path),
            "--label-column", "label", "--no-figures",
            "--post-low", str(SYNTH_POST[0]), "--post-high", str(SYNTH_POST[1]),
            "--out", str(out),
        ])
        assert code == 0
        for artifact in ("precondition.json", "profile.json", "verdicts.csv",
                         "metrics.json", "metrics.txt"):
            assert (out / artifact).exists()
        stdout = capsys.readouterr().out
        for stage in ("infer:", "threshold:", "check:", "eval:"):
            assert stage in stdout

    def test_determinism_across_runs(self, synth_files, tmp_path):
        model_path, validation_path, unseen_path = synth_files
        outputs = []
        for name in ("out1", "out2"):
            out = tmp_path / name
            code = main([
                "run", "--model", str(model_path),
                "--validation", str(validation_path), "--unseen", str(unseen_path),
                "--label-column", "label", "--no-figures",
                "--post-low", str(SYNTH_POST[0]), "--post-high", str(SYNTH_POST[1]),
                "--out", str(out),
            ])
            assert code == 0
            outputs.append(out)
        for artifact in ("precondition.json", "profile.json", "verdicts.csv"):
            first = (outputs[0] / artifact).read_bytes()
            second = (outputs[1] / artifact).read_bytes()
            assert first == second


class TestPredict:
    def test_outputs_match_forward(self, synth_files, tmp_path):
        model_path, validation_path, _ = synth_files
        out = tmp_path / "out"
        code = main([
            "predict", "--model", str(model_path),
            "--data", str(validation_path), "--out", str(out),
        ])
        assert code == 0
        lines = (out / "predictions.csv").read_text().splitlines()
        assert lines[0] == "row_index,y0,label"
        model = load_model(model_path)
        expected = forward_batch(model, synthetic_validation())
        got = np.array([float(line.split(",")[1]) for line in lines[1:]])
        np.testing.assert_allclose(got, expected[:, 0], atol=1e-12)
