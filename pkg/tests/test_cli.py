import json
import os

import pytest

from lamkit.cli import main
from lamkit.selection import AnchorPlan


SYNTH_ARGS = [
    "--seed", "0", "--layers", "6", "--dim", "8", "--classes", "4",
    "--train-per-class", "12", "--val-per-class", "4", "--test-per-class", "4",
    "--profile", "0.9@2,0.85@3", "--profile-base", "0.3",
    "--vowel-segments", "0",
]


@pytest.fixture
def corpus_files(tmp_path):
    src = str(tmp_path / "s.ladf")
    tar = str(tmp_path / "t.ladf")
    truth = str(tmp_path / "gt.json")
    rc = main(["synth", *SYNTH_ARGS, "--out-src", src, "--out-tar", tar,
               "--truth", truth])
    assert rc == 0
    return src, tar, truth


class TestSynthAndValidate:
    def test_outputs_validate_cleanly(self, corpus_files, capsys):
        src, tar, truth = corpus_files
        assert json.load(open(truth))["seed"] == 0
        assert main(["validate", src]) == 0
        assert main(["validate", tar]) == 0
        out = capsys.readouterr().out
        assert "0 violation(s)" in out

    def test_validate_rejects_garbage(self, tmp_path, capsys):
        bad = tmp_path / "bad.ladf"
        bad.write_bytes(b"XXXX not a real file")
        assert main(["validate", str(bad)]) == 1

    def test_synth_deterministic(self, tmp_path):
        paths = [
            (str(tmp_path / f"s{i}.ladf"), str(tmp_path / f"t{i}.ladf"))
            for i in (1, 2)
        ]
        for src, tar in paths:
            main(["synth", *SYNTH_ARGS, "--out-src", src, "--out-tar", tar])
        assert open(paths[0][0], "rb").read() == open(paths[1][0], "rb").read()
        assert open(paths[0][1], "rb").read() == open(paths[1][1], "rb").read()


class TestSimilarityAndSelect:
    def test_pipeline_to_plan(self, corpus_files, tmp_path):
        src, tar, _ = corpus_files
        sim = str(tmp_path / "sim.json")
        csv_path = str(tmp_path / "sim.csv")
        assert main(["similarity", "--source", src, "--target", tar,
                     "--out", sim, "--csv", csv_path]) == 0
        report = json.load(open(sim))
        assert report["level"] == "utterance"
        assert len(report["cells"]) == 4 * 6  # emotions x layers
        assert len(open(csv_path).read().splitlines()) == 1 + 4 * 6

        plan_path = str(tmp_path / "plan.json")
        assert main(["select", "--sim", sim, "--strategy", "gl", "--k", "2",
                     "--out", plan_path]) == 0
        plan = AnchorPlan.from_json(open(plan_path).read())
        assert plan.strategy == "GL"
        assert plan.layers == (2, 3)  # the planted high-similarity layers

    def test_select_requires_input(self, tmp_path):
        assert main(["select", "--strategy", "gl",
                     "--out", str(tmp_path / "p.json")]) == 1

    def test_preset_subcommand(self, capsys):
        assert main(["preset", "--name", "wavlm-paper"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["wavlm-paper"]["GL"] == [8, 9, 11]

    def test_preset_lists_all(self, capsys):
        assert main(["preset"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert set(payload) == {"wavlm-paper", "whisper-paper"}


class TestTrainEvaluate:
    def test_train_then_evaluate(self, corpus_files, tmp_path, capsys):
        src, tar, _ = corpus_files
        run_dir = str(tmp_path / "run")
        rc = main([
            "train", "--source", src, "--target", tar, "--layers", "2,3",
            "--seed", "1", "--out", run_dir, "--max-epochs", "3",
            "--batch-size", "16", "--learning-rate", "0.001",
        ])
        assert rc == 0
        model = os.path.join(run_dir, "model.lamp")
        report = json.load(open(os.path.join(run_dir, "report.json")))
        assert report["epochs_run"] <= 3
        assert report["config"]["anchor"]["layers"] == [2, 3]

        out_json = str(tmp_path / "eval.json")
        assert main(["evaluate", "--model", model, "--data", tar,
                     "--split", "test", "--out", out_json]) == 0
        printed = capsys.readouterr().out
        assert "uar " in printed
        payload = json.load(open(out_json))
        assert 0.0 <= payload["uar"] <= 1.0

    def test_error_reported_with_category(self, tmp_path, capsys):
        bad = tmp_path / "bad.lamp"
        bad.write_bytes(b"not a checkpoint")
        rc = main(["evaluate", "--model", str(bad),
                   "--data", str(tmp_path / "missing.ladf")])
        assert rc == 1
        assert "error [" in capsys.readouterr().err


class TestExperiment:
    def test_grid_with_inline_anchors(self, corpus_files, tmp_path):
        src, tar, _ = corpus_files
        out_csv = str(tmp_path / "table.csv")
        out_json = str(tmp_path / "table.json")
        rc = main([
            "experiment", "--source", src, "--target", tar,
            "--anchor", "GL=2,3", "--anchor", "none",
            "--seeds", "0,1", "--max-epochs", "2", "--batch-size", "16",
            "--out-csv", out_csv, "--out-json", out_json,
        ])
        assert rc == 0
        lines = open(out_csv).read().splitlines()
        assert lines[0] == "strategy,seed,uar,best_epoch,epochs_run"
        assert len(lines) == 1 + 4
        payload = json.load(open(out_json))
        assert set(payload["summary"]) == {"GL", "none"}

    def test_grid_needs_strategies(self, corpus_files, tmp_path):
        src, tar, _ = corpus_files
        rc = main(["experiment", "--source", src, "--target", tar,
                   "--seeds", "0", "--out-csv", str(tmp_path / "x.csv")])
        assert rc == 1
