import csv
import json
from pathlib import Path

import pytest

from evopunn.cli import main
from evopunn.data import load_dataset


@pytest.fixture
def balance_splits(tmp_path):
    """gendata -> preprocess -> split, returning the split directory."""
    raw = tmp_path / "raw"
    proc = tmp_path / "proc"
    main(["gendata", "--preset", "balance", "--out", str(raw)])
    main([
        "preprocess", "--data", str(raw / "balance.csv"),
        "--schema", str(raw / "balance.schema"), "--out", str(proc),
    ])
    main(["split", "--data", str(proc), "--ratio", "0.75", "--seed", "11", "--out", str(proc)])
    return proc


class TestPipelineVerbs:
    def test_full_flow(self, balance_splits, capsys):
        train = load_dataset(balance_splits / "train.dat")
        test = load_dataset(balance_splits / "test.dat")
        assert train.pattern_count == 469
        assert test.pattern_count == 156
        assert train.input_count == 4

    def test_preprocess_reports_shape(self, tmp_path, capsys):
        raw = tmp_path / "raw"
        main(["gendata", "--preset", "balance", "--out", str(raw)])
        capsys.readouterr()
        main([
            "preprocess", "--data", str(raw / "balance.csv"),
            "--schema", str(raw / "balance.schema"), "--out", str(tmp_path / "p"),
        ])
        out = capsys.readouterr().out
        assert "625 patterns" in out and "4 inputs" in out and "3 classes" in out


class TestEvalsVerb:
    @pytest.mark.parametrize(
        "gen,row",
        [
            (100, "128000\t200000\t36"),
            (120, "149600\t236000\t37"),
            (150, "182000\t290000\t37"),
            (300, "344000\t560000\t39"),
            (500, "560000\t920000\t39"),
        ],
    )
    def test_published_rows_bit_exact(self, gen, row, capsys):
        main(["evals", "--pop", "1000", "--gen", str(gen)])
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "tsea\tedd\treduction_percent"
        assert lines[1] == row


class TestTrainAndPredict:
    def test_train_writes_model_and_trace(self, balance_splits, tmp_path, capsys):
        model = tmp_path / "model.json"
        trace = tmp_path / "trace.tsv"
        code = main([
            "train", "--method", "edd", "--config", "1",
            "--neu", "2", "--gen", "3",
            "--train", str(balance_splits / "train.dat"),
            "--test", str(balance_splits / "test.dat"),
            "--seed", "42", "--model-out", str(model),
            "--trace", str(trace), "--pop-size", "10",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "ccr_train=" in out and "ccr_test=" in out
        doc = json.loads(model.read_text())
        assert doc["format"] == "punn-model"
        assert doc["input_count"] == 4
        assert doc["class_names"] == ["B", "L", "R"]
        lines = trace.read_text().strip().splitlines()
        assert len(lines) == 3
        for line in lines:
            fields = line.split("\t")
            assert len(fields) == 5

    def test_train_rejects_method_config_mismatch(self, balance_splits, tmp_path):
        with pytest.raises(SystemExit):
            main([
                "train", "--method", "edd", "--config", "1star",
                "--neu", "2", "--gen", "3",
                "--train", str(balance_splits / "train.dat"),
                "--test", str(balance_splits / "test.dat"),
                "--seed", "42", "--model-out", str(tmp_path / "m.json"),
            ])

    def test_two_stage_train_and_predict(self, balance_splits, tmp_path, capsys):
        model = tmp_path / "model.json"
        main([
            "train", "--method", "tsea", "--config", "1star",
            "--neu", "2", "--gen", "10",
            "--train", str(balance_splits / "train.dat"),
            "--test", str(balance_splits / "test.dat"),
            "--seed", "7", "--model-out", str(model), "--pop-size", "10",
        ])
        capsys.readouterr()
        main(["predict", "--model", str(model), "--data", str(balance_splits / "test.dat")])
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 156 + 1  # one class per row plus the accuracy line
        assert set(lines[:-1]) <= {"B", "L", "R"}
        assert lines[-1].startswith("ccr=")

    def test_train_determinism(self, balance_splits, tmp_path, capsys):
        texts = []
        for name in ("a.json", "b.json"):
            main([
                "train", "--method", "edd", "--config", "1",
                "--neu", "2", "--gen", "4",
                "--train", str(balance_splits / "train.dat"),
                "--test", str(balance_splits / "test.dat"),
                "--seed", "9", "--model-out", str(tmp_path / name), "--pop-size", "10",
            ])
            texts.append((tmp_path / name).read_text())
        capsys.readouterr()
        assert texts[0] == texts[1]


class TestExperimentVerb:
    def test_small_experiment_writes_report(self, balance_splits, tmp_path, capsys):
        report = tmp_path / "report.csv"
        code = main([
            "experiment", "--preset", "balance", "--config", "1",
            "--runs", "2", "--seed", "3", "--out", str(report),
            "--train", str(balance_splits / "train.dat"),
            "--test", str(balance_splits / "test.dat"),
            "--pop-size", "10",
        ])
        assert code == 0
        with open(report, newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + 2 + 2  # header, two runs, mean and sd
        assert rows[-2][0] == "mean"
        out = capsys.readouterr().out
        assert "balance config 1" in out
