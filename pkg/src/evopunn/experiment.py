"""Experiment orchestration: benchmark presets, repeated seeded runs,
summary statistics and report files."""

from __future__ import annotations

import csv
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .evolution import (
    EaParams,
    EvalCounter,
    Individual,
    MutationState,
    initialize_population,
    run_evolution,
)
from .network import correct_classification_rate
from .twostage import TseaParams, run_two_stage


@dataclass(frozen=True)
class DatasetPreset:
    """Per-dataset training budget: hidden-node base count and generations."""
    hidden_nodes: int
    generations: int
    available: bool = True
    note: str = ""


PRESETS: dict[str, DatasetPreset] = {
    "australian": DatasetPreset(4, 100),
    "balance": DatasetPreset(5, 150),
    "cancer": DatasetPreset(2, 100),
    "heart": DatasetPreset(3, 300),
    "hepatitis": DatasetPreset(3, 100),
    "horse": DatasetPreset(4, 300),
    "hypothyroid": DatasetPreset(3, 500),
    "ionos": DatasetPreset(4, 500),
    "liver": DatasetPreset(4, 300),
    "newthyroid": DatasetPreset(3, 300),
    "pima": DatasetPreset(3, 120),
    "waveform": DatasetPreset(3, 500),
    "btx": DatasetPreset(5, 500, available=False, note="proprietary data, no public source"),
    "listeria": DatasetPreset(4, 300, available=False, note="proprietary data, no public source"),
}

# configuration id -> (method, hidden-node offset, coefficient-noise scale)
CONFIGURATIONS: dict[str, tuple[str, int, float]] = {
    "1": ("edd", 0, 1.0),
    "2": ("edd", 1, 1.0),
    "3": ("edd", 0, 1.5),
    "4": ("edd", 1, 1.5),
    "1star": ("tsea", 0, 1.0),
    "2star": ("tsea", 0, 1.5),
}


@dataclass
class ExperimentConfig:
    method: str                  # "edd" (single full-length run) or "tsea"
    config_id: str
    neu: int
    gen: int
    alpha2: float
    pop_size: int = 1000
    n_runs: int = 30
    master_seed: int = 0
    preset: str | None = None

    def ea_params(self) -> EaParams:
        """Engine parameters. For "edd" the hidden cap already includes the
        configuration's offset; for "tsea" it is the smaller of the two caps."""
        _, offset, _ = CONFIGURATIONS[self.config_id]
        cap = self.neu + (offset if self.method == "edd" else 0)
        return EaParams(
            gen=self.gen, max_hidden=cap, pop_size=self.pop_size, alpha2=self.alpha2
        )

    def tsea_params(self) -> TseaParams:
        if self.method != "tsea":
            raise ValueError("not a two-stage configuration")
        return TseaParams(self.ea_params())


def make_config(
    config_id: str,
    preset: str | None = None,
    neu: int | None = None,
    gen: int | None = None,
    n_runs: int = 30,
    master_seed: int = 0,
    pop_size: int = 1000,
) -> ExperimentConfig:
    if config_id not in CONFIGURATIONS:
        raise ValueError(f"unknown configuration {config_id!r}; choose from {sorted(CONFIGURATIONS)}")
    method, _, alpha2 = CONFIGURATIONS[config_id]
    if preset is not None:
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        ps = PRESETS[preset]
        if not ps.available:
            raise ValueError(f"preset {preset!r} is disabled: {ps.note}")
        neu = ps.hidden_nodes if neu is None else neu
        gen = ps.generations if gen is None else gen
    if neu is None or gen is None:
        raise ValueError("either a preset or explicit neu and gen values are required")
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    return ExperimentConfig(
        method=method, config_id=config_id, neu=neu, gen=gen, alpha2=alpha2,
        pop_size=pop_size, n_runs=n_runs, master_seed=master_seed, preset=preset,
    )


@dataclass
class RunRecord:
    run_index: int
    seed: int
    ccr_train: float
    ccr_test: float
    connections: int
    evaluations: int
    generations: int
    wall_time: float


@dataclass
class Summary:
    mean_ccr_test: float
    sd_ccr_test: float
    mean_connections: float
    sd_connections: float


def run_single(
    config: ExperimentConfig, train, test, seed: int, run_index: int = 0,
    on_generation=None,
) -> tuple[RunRecord, Individual]:
    """One seeded training run; measures accuracy of the best individual."""
    rng = np.random.default_rng(seed)
    counter = EvalCounter()
    started = time.perf_counter()
    if config.method == "tsea":
        best, counter, history = run_two_stage(
            config.tsea_params(), rng, train, counter, on_generation=on_generation
        )
        generations = history.total_generations
    else:
        params = config.ea_params()
        population = initialize_population(rng, params, train, counter)
        state = MutationState(params.alpha1, params.alpha2)
        callback = None
        if on_generation is not None:
            callback = lambda g, pop, c: on_generation("run", g, pop, c)
        population, generations = run_evolution(
            population, state, rng, params, train, counter, on_generation=callback
        )
        best = population[0]
    elapsed = time.perf_counter() - started
    record = RunRecord(
        run_index=run_index,
        seed=seed,
        ccr_train=correct_classification_rate(best.net, train),
        ccr_test=correct_classification_rate(best.net, test),
        connections=best.connections,
        evaluations=counter.total,
        generations=generations,
        wall_time=elapsed,
    )
    return record, best


def _run_for_pool(args) -> RunRecord:
    config, train, test, seed, index = args
    record, _ = run_single(config, train, test, seed, index)
    return record


def run_experiment(
    config: ExperimentConfig, train, test, workers: int = 1
) -> list[RunRecord]:
    """n_runs independent runs with seeds master_seed + i, reported in run
    order. Runs are independent, so they may execute on several processes;
    the records are identical either way."""
    tasks = [
        (config, train, test, config.master_seed + i, i) for i in range(config.n_runs)
    ]
    if workers <= 1 or config.n_runs == 1:
        return [_run_for_pool(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_for_pool, tasks))


def summarize(records: list[RunRecord]) -> Summary:
    """Mean and sample standard deviation (n-1) of test accuracy and
    connection count; a single record has deviation 0 by convention."""
    if not records:
        raise ValueError("no records to summarize")
    ccr = [r.ccr_test for r in records]
    conn = [float(r.connections) for r in records]

    def sd(values):
        return statistics.stdev(values) if len(values) > 1 else 0.0

    return Summary(statistics.fmean(ccr), sd(ccr), statistics.fmean(conn), sd(conn))


_REPORT_COLUMNS = (
    ("run", None),
    ("seed", None),
    ("ccr_train", 2),
    ("ccr_test", 2),
    ("connections", 2),
    ("evaluations", 2),
    ("generations", 2),
    ("wall_time_s", 3),
)


def write_report(records: list[RunRecord], path) -> None:
    """Comma-separated report: header, one row per run, then mean and sd rows.

    Accuracy and connection counts are printed with two decimals. The summary
    rows are computed from the per-run values exactly as printed, so
    recomputing the statistics from the file reproduces them.
    """
    if not records:
        raise ValueError("no records to report")
    cells_per_run = []
    for r in records:
        cells_per_run.append([
            str(r.run_index),
            str(r.seed),
            f"{r.ccr_train:.2f}",
            f"{r.ccr_test:.2f}",
            str(r.connections),
            str(r.evaluations),
            str(r.generations),
            f"{r.wall_time:.3f}",
        ])

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(name for name, _ in _REPORT_COLUMNS)
        writer.writerows(cells_per_run)
        summary_mean = ["mean", ""]
        summary_sd = ["sd", ""]
        for col, (name, digits) in enumerate(_REPORT_COLUMNS):
            if name in ("run", "seed"):
                continue
            emitted = [float(row[col]) for row in cells_per_run]
            mean = statistics.fmean(emitted)
            sd = statistics.stdev(emitted) if len(emitted) > 1 else 0.0
            summary_mean.append(f"{mean:.{digits}f}")
            summary_sd.append(f"{sd:.{digits}f}")
        writer.writerow(summary_mean)
        writer.writerow(summary_sd)
