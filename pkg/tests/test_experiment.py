import csv
import statistics

import numpy as np
import pytest

from evopunn.experiment import (
    CONFIGURATIONS,
    PRESETS,
    RunRecord,
    make_config,
    run_experiment,
    run_single,
    summarize,
    write_report,
)


PUBLISHED_BUDGETS = {
    "australian": (4, 100),
    "balance": (5, 150),
    "cancer": (2, 100),
    "heart": (3, 300),
    "hepatitis": (3, 100),
    "horse": (4, 300),
    "hypothyroid": (3, 500),
    "ionos": (4, 500),
    "liver": (4, 300),
    "newthyroid": (3, 300),
    "pima": (3, 120),
    "waveform": (3, 500),
}


class TestPresets:
    def test_budgets_match_published_table(self):
        for name, (neu, gen) in PUBLISHED_BUDGETS.items():
            preset = PRESETS[name]
            assert (preset.hidden_nodes, preset.generations) == (neu, gen), name
            assert preset.available

    def test_stage1_lengths(self):
        for name, (neu, gen) in PUBLISHED_BUDGETS.items():
            config = make_config("1star", preset=name)
            assert config.tsea_params().stage1_generations == gen // 10

    def test_proprietary_presets_disabled(self):
        for name in ("btx", "listeria"):
            assert not PRESETS[name].available
            with pytest.raises(ValueError, match="disabled"):
                make_config("1", preset=name)

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="unknown preset"):
            make_config("1", preset="nope")


class TestConfigurations:
    def test_method_mapping(self):
        assert {cid: CONFIGURATIONS[cid][0] for cid in CONFIGURATIONS} == {
            "1": "edd", "2": "edd", "3": "edd", "4": "edd",
            "1star": "tsea", "2star": "tsea",
        }

    @pytest.mark.parametrize(
        "cid,offset,alpha2",
        [("1", 0, 1.0), ("2", 1, 1.0), ("3", 0, 1.5), ("4", 1, 1.5)],
    )
    def test_full_run_configurations(self, cid, offset, alpha2):
        config = make_config(cid, preset="pima")
        params = config.ea_params()
        assert params.max_hidden == 3 + offset
        assert params.alpha2 == alpha2
        assert params.gen == 120
        assert params.pop_size == 1000

    @pytest.mark.parametrize("cid,alpha2", [("1star", 1.0), ("2star", 1.5)])
    def test_two_stage_configurations(self, cid, alpha2):
        config = make_config(cid, preset="pima")
        tsea = config.tsea_params()
        assert tsea.neu == 3  # stage-two cap is neu + 1 inside the runner
        assert tsea.ea.alpha2 == alpha2
        assert tsea.ea.pop_size == 1000
        assert tsea.stage1_generations == 12

    def test_explicit_budget_overrides(self):
        config = make_config("1star", neu=2, gen=30, pop_size=10)
        assert (config.neu, config.gen, config.pop_size) == (2, 30, 10)

    def test_config_without_budget_rejected(self):
        with pytest.raises(ValueError, match="preset or explicit"):
            make_config("1")


class TestRunExperiment:
    def small_config(self, cid="1", runs=3, seed=100):
        return make_config(cid, neu=2, gen=4, n_runs=runs, master_seed=seed, pop_size=10)

    def test_records_in_run_order_with_derived_seeds(self, toy_train):
        config = self.small_config(runs=4)
        records = run_experiment(config, toy_train, toy_train)
        assert [r.run_index for r in records] == [0, 1, 2, 3]
        assert [r.seed for r in records] == [100, 101, 102, 103]
        assert len({r.seed for r in records}) == 4
        for r in records:
            assert 0.0 <= r.ccr_train <= 100.0
            assert 0.0 <= r.ccr_test <= 100.0
            assert r.evaluations > 0

    def test_single_run_deterministic(self, toy_train):
        config = self.small_config(runs=1)
        a = run_experiment(config, toy_train, toy_train)[0]
        b = run_experiment(config, toy_train, toy_train)[0]
        assert (a.ccr_train, a.ccr_test, a.connections, a.evaluations, a.generations) == (
            b.ccr_train, b.ccr_test, b.connections, b.evaluations, b.generations
        )

    def test_two_stage_method_runs(self, toy_train):
        config = make_config("1star", neu=2, gen=10, n_runs=1, master_seed=5, pop_size=10)
        records = run_experiment(config, toy_train, toy_train)
        assert records[0].evaluations > 0
        assert records[0].generations >= 2  # at least the two stage-one phases

    def test_workers_do_not_change_results(self, toy_train):
        config = self.small_config(runs=4)
        sequential = run_experiment(config, toy_train, toy_train, workers=1)
        parallel = run_experiment(config, toy_train, toy_train, workers=2)
        for a, b in zip(sequential, parallel):
            assert (a.seed, a.ccr_train, a.ccr_test, a.connections, a.evaluations) == (
                b.seed, b.ccr_train, b.ccr_test, b.connections, b.evaluations
            )

    def test_different_master_seeds_complete(self, toy_train):
        for seed in (1, 2):
            config = self.small_config(runs=2, seed=seed)
            assert len(run_experiment(config, toy_train, toy_train)) == 2


def record(i, ccr_test, connections=10):
    return RunRecord(i, 100 + i, 75.0, ccr_test, connections, 1000, 5, 0.25)


class TestSummarize:
    def test_pair(self):
        summary = summarize([record(0, 80.0), record(1, 90.0)])
        assert summary.mean_ccr_test == pytest.approx(85.0)
        assert summary.sd_ccr_test == pytest.approx(7.0711, abs=1e-4)

    def test_identical_values(self):
        summary = summarize([record(i, 88.0) for i in range(5)])
        assert summary.sd_ccr_test == 0.0

    def test_single_record(self):
        summary = summarize([record(0, 88.0, connections=7)])
        assert summary.mean_ccr_test == 88.0
        assert summary.sd_ccr_test == 0.0
        assert summary.mean_connections == 7.0
        assert summary.sd_connections == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])


class TestWriteReport:
    def test_shape_and_self_consistency(self, tmp_path):
        records = [record(i, 80.0 + i * 0.537, connections=10 + i % 7) for i in range(30)]
        path = tmp_path / "report.csv"
        write_report(records, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, data, mean_row, sd_row = rows[0], rows[1:-2], rows[-2], rows[-1]
        assert len(data) == 30
        assert mean_row[0] == "mean" and sd_row[0] == "sd"
        # summary rows equal statistics recomputed from the emitted cells
        for col in range(2, len(header)):
            emitted = [float(r[col]) for r in data]
            digits = len(mean_row[col].split(".")[1])
            assert mean_row[col] == f"{statistics.fmean(emitted):.{digits}f}"
            assert sd_row[col] == f"{statistics.stdev(emitted):.{digits}f}"

    def test_round_trip_precision(self, tmp_path):
        records = [record(0, 81.256789)]
        path = tmp_path / "report.csv"
        write_report(records, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[1][3] == "81.26"  # test accuracy at two decimals

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_report([], tmp_path / "r.csv")
