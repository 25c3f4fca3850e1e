"""Seeded Monte-Carlo harness: run allocators, validate, score, write results.

Output directory layout (``run_experiment`` / ``compare_experiment``)::

    runs.csv        one row per (run, algorithm) with the rate criteria
    summary.json    config, per-run seeds, mean criteria and pooled CDFs
    timing.csv      wall time per allocation against the 100 ms budget
    compare.csv     (compare only) per-run optimality gap per algorithm
    compare.json    (compare only) mean / max gap per algorithm

Everything except ``timing.csv`` is a pure function of the config.
"""
from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .bgm_pa import GroupMetric, pre_group, run_bgm_pa
from .bgm_sa import run_bgm_sa
from .channel import (
    CHANNEL_STREAM,
    GROUPING_STREAM,
    SinrModelConfig,
    WeightMatrix,
    derive_seed,
    generate_weights,
    load_weights,
    make_rng,
)
from .evaluation import RunCriteria, aggregate, rate_criteria, vehicle_rates
from .grid import Allocation, Scenario, load_scenario, shared_intersection_scenario, validate_allocation
from .oracle import DEFAULT_LIMIT, exhaustive_solve, search_space_estimate, SearchSpaceExceeded

ALGORITHMS = ("exhaustive", "bgm-sa", "bgm-pa")
BUDGET_S = 0.1  # one full allocation per CAM period at 10 Hz


class ConflictError(RuntimeError):
    """An allocator emitted an allocation that fails validation."""


@dataclass
class ExperimentConfig:
    algorithms: Sequence[str] = ("bgm-sa", "bgm-pa")
    metrics: Sequence[str] = ("min",)
    runs: int = 1
    master_seed: int = 0
    scenario_path: str | None = None
    cluster_sizes: Sequence[int] | None = None
    intersection: int = 0
    K: int = 7
    L: int = 100
    weights_file: str | None = None
    sinr_db_mean: float = 15.0
    sinr_db_stddev: float = 8.0
    per_subframe_correlation: float = 0.0
    oracle_limit: int = DEFAULT_LIMIT
    cdf_points: int = 1001
    workers: int = 1
    save_allocations: bool = False
    out: str | None = None

    def __post_init__(self):
        self.algorithms = tuple(self.algorithms)
        self.metrics = tuple(GroupMetric.parse(m).value for m in self.metrics)
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ValueError(f"unknown algorithms {bad}; choose from {list(ALGORITHMS)}")
        if self.scenario_path is None:
            if not self.cluster_sizes:
                raise ValueError("need a scenario file or cluster sizes")
            self.cluster_sizes = tuple(int(n) for n in self.cluster_sizes)
            if self.intersection > min(self.cluster_sizes):
                raise ValueError(
                    f"intersection {self.intersection} exceeds smallest cluster {min(self.cluster_sizes)}"
                )

    def scenario(self) -> Scenario:
        if self.scenario_path is not None:
            return load_scenario(self.scenario_path)
        return shared_intersection_scenario(self.cluster_sizes, self.intersection, self.K, self.L)

    def sinr_model(self) -> SinrModelConfig:
        return SinrModelConfig(
            master_seed=self.master_seed,
            sinr_db_mean=self.sinr_db_mean,
            sinr_db_stddev=self.sinr_db_stddev,
            per_subframe_correlation=self.per_subframe_correlation,
        )

    def labels(self) -> list[str]:
        out = []
        for a in self.algorithms:
            if a == "bgm-pa":
                out.extend(f"bgm-pa-{m}" for m in self.metrics)
            else:
                out.append(a)
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("algorithms", "metrics", "cluster_sizes"):
            if d[k] is not None:
                d[k] = list(d[k])
        d.pop("workers")
        d.pop("out")
        return d


@dataclass
class RunRecord:
    run: int
    algorithm: str
    criteria: RunCriteria
    sum_rate: float
    wall_time: float
    rates: np.ndarray = field(repr=False)
    allocation: Allocation = field(repr=False)


def run_weights(config: ExperimentConfig, scenario: Scenario, run_index: int) -> WeightMatrix:
    if config.weights_file is not None:
        return load_weights(config.weights_file, (scenario.vehicle_count, scenario.grid.n_subchannels))
    return generate_weights(scenario, config.sinr_model(), run_index)


def run_once(config: ExperimentConfig, scenario: Scenario, run_index: int, weights=None) -> list[RunRecord]:
    """Every configured algorithm on one weight draw, validated."""
    if weights is None:
        weights = run_weights(config, scenario, run_index)
    grouping = None
    records = []
    for label in config.labels():
        t0 = time.perf_counter()
        if label == "exhaustive":
            alloc = exhaustive_solve(scenario, weights, config.oracle_limit).best_allocation
        elif label == "bgm-sa":
            alloc = run_bgm_sa(scenario, weights)
        else:
            if grouping is None:
                grouping = pre_group(scenario, make_rng(config.master_seed, run_index, GROUPING_STREAM))
            alloc = run_bgm_pa(scenario, weights, label.removeprefix("bgm-pa-"), grouping=grouping)
        elapsed = time.perf_counter() - t0
        report = validate_allocation(alloc, scenario)
        if not report.ok:
            raise ConflictError(
                f"run {run_index} (master seed {config.master_seed}), {label}: {report.describe()}"
            )
        rates = vehicle_rates(alloc, weights)
        records.append(
            RunRecord(run_index, label, rate_criteria(rates), float(rates.sum()), elapsed, rates, alloc)
        )
    return records


def _run_chunk(args) -> list[RunRecord]:
    config, scenario, run_index = args
    return run_once(config, scenario, run_index)


def run_all(config: ExperimentConfig, scenario: Scenario | None = None) -> list[list[RunRecord]]:
    """Records for every run, ordered by run index."""
    scenario = scenario or config.scenario()
    jobs = [(config, scenario, r) for r in range(config.runs)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_run_chunk, jobs))
    return [_run_chunk(j) for j in jobs]


def _fmt(x: float) -> str:
    return repr(float(x))


def _cdf_payload(cdf, bandwidth: float, points: int) -> dict:
    rates, probs = cdf.rates, cdf.probabilities
    if points and len(rates) > points:
        # thin to an evenly spaced probability grid; every point is a sample
        idx = np.unique(np.ceil(np.linspace(1, len(rates), points)).astype(int) - 1)
        rates, probs = rates[idx], probs[idx]
    return {
        "rates": [float(x) for x in rates],
        "spectral_efficiency": [float(x / bandwidth) for x in rates],
        "probabilities": [float(p) for p in probs],
    }


def summarize(config: ExperimentConfig, scenario: Scenario, records: list[list[RunRecord]]) -> dict:
    by_alg: dict[str, list[RunRecord]] = {}
    for run in records:
        for rec in run:
            by_alg.setdefault(rec.algorithm, []).append(rec)
    algorithms = {}
    for label in config.labels():
        recs = by_alg.get(label, [])
        mean, cdf = aggregate([r.criteria for r in recs], [r.rates for r in recs])
        algorithms[label] = {
            "mean": asdict(mean),
            "mean_sum_rate": float(np.mean([r.sum_rate for r in recs])),
            "cdf": _cdf_payload(cdf, scenario.grid.subchannel_bandwidth, config.cdf_points),
        }
    seeds = {
        str(r): {
            "channel": derive_seed(config.master_seed, r, CHANNEL_STREAM),
            "grouping": derive_seed(config.master_seed, r, GROUPING_STREAM),
        }
        for r in range(config.runs)
    }
    return {
        "config": config.to_dict(),
        "scenario": scenario.to_dict(),
        "seeds": seeds,
        "algorithms": algorithms,
    }


def write_results(config: ExperimentConfig, scenario: Scenario, records: list[list[RunRecord]], out: str | os.PathLike) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "runs.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", "algorithm", *RunCriteria.field_names(), "sum_rate"])
        for run in records:
            for rec in run:
                w.writerow([rec.run, rec.algorithm, *map(_fmt, rec.criteria.as_tuple()), _fmt(rec.sum_rate)])
    with open(out / "timing.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", "algorithm", "wall_time_s", "within_100ms_budget"])
        for run in records:
            for rec in run:
                w.writerow([rec.run, rec.algorithm, f"{rec.wall_time:.6f}", int(rec.wall_time <= BUDGET_S)])
    with open(out / "summary.json", "w") as fh:
        json.dump(summarize(config, scenario, records), fh, indent=1)
        fh.write("\n")
    if config.save_allocations:
        with open(out / "allocations.jsonl", "w") as fh:
            for run in records:
                for rec in run:
                    fh.write(json.dumps({"run": rec.run, "algorithm": rec.algorithm, **rec.allocation.to_dict()}) + "\n")
        with open(out / "scenario.json", "w") as fh:
            json.dump(scenario.to_dict(), fh, indent=2)
            fh.write("\n")
    return out


def run_experiment(config: ExperimentConfig) -> list[list[RunRecord]]:
    scenario = config.scenario()
    records = run_all(config, scenario)
    if config.out is not None:
        write_results(config, scenario, records, config.out)
    return records


@dataclass
class GapReport:
    per_run: list[dict[str, float]]  # algorithm -> gap, one dict per run
    mean_gap: dict[str, float]
    max_gap: dict[str, float]


def optimality_gap(value: float, optimum: float) -> float:
    if optimum <= 0:
        return 0.0
    return 1.0 - value / optimum


def compare_experiment(config: ExperimentConfig) -> GapReport:
    """Optimality gap ``1 - heuristic / oracle`` of every heuristic, per run."""
    scenario = config.scenario()
    estimate = search_space_estimate(scenario)
    if estimate > config.oracle_limit:
        raise SearchSpaceExceeded(estimate, config.oracle_limit)
    heur = ExperimentConfig(**{**asdict(config), "algorithms": [a for a in config.algorithms if a != "exhaustive"]})
    per_run = []
    for r in range(config.runs):
        weights = run_weights(config, scenario, r)
        best = exhaustive_solve(scenario, weights, config.oracle_limit).best_value
        gaps = {"exhaustive": 0.0}
        for rec in run_once(heur, scenario, r, weights):
            gaps[rec.algorithm] = optimality_gap(rec.sum_rate, best)
        per_run.append(gaps)
    labels = list(per_run[0])
    report = GapReport(
        per_run,
        {a: float(np.mean([g[a] for g in per_run])) for a in labels},
        {a: float(np.max([g[a] for g in per_run])) for a in labels},
    )
    if config.out is not None:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "compare.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["run", *labels])
            for r, g in enumerate(per_run):
                w.writerow([r, *(_fmt(g[a]) for a in labels)])
        with open(out / "compare.json", "w") as fh:
            json.dump(
                {"config": config.to_dict(), "scenario": scenario.to_dict(),
                 "mean_gap": report.mean_gap, "max_gap": report.max_gap},
                fh, indent=1,
            )
            fh.write("\n")
    return report
