"""Exit criteria. Each test records one PASS/FAIL line in the terminal summary.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from bgmalloc.bgm_pa import GroupMetric, pre_group, run_bgm_pa
from bgmalloc.bgm_sa import run_bgm_sa
from bgmalloc.channel import GROUPING_STREAM, SinrModelConfig, generate_weights, make_rng
from bgmalloc.experiment import ExperimentConfig, optimality_gap, run_all, run_experiment
from bgmalloc.grid import ResourceGrid, Scenario, shared_intersection_scenario, validate_allocation
from bgmalloc.hungarian import solve
from bgmalloc.oracle import exhaustive_solve
from bgmalloc.reduction import recover_subchannel, reduce
from oracles import best_permutation_value

pytestmark = pytest.mark.acceptance


def sum_rate(alloc, weights):
    c = weights.values if hasattr(weights, "values") else weights
    return float(sum(c[v - 1, k - 1] for v, k in alloc.assignment.items()))


def test_1_matching_optimality(record_criterion):
    rng = np.random.default_rng(1001)
    worst, elapsed = 0.0, 0.0
    for _ in range(500):
        n = int(rng.integers(2, 8))
        w = rng.normal(size=(n, n)) * 10 ** rng.uniform(-3, 7)
        w /= np.abs(w).max()
        t = time.perf_counter()
        got = solve(w).total_weight
        elapsed += time.perf_counter() - t
        worst = max(worst, abs(got - best_permutation_value(w)))
    passed = worst <= 1e-9 and elapsed < 10
    record_criterion(1, passed, f"500 instances, max |error| {worst:.2e} (tol 1e-9), solver time {elapsed:.2f}s (< 10s)")
    assert passed


def test_2_reduction_correctness(record_criterion):
    rng = np.random.default_rng(1002)
    cfg = SinrModelConfig(master_seed=1002)
    worst = 0.0
    t = time.perf_counter()
    for i in range(200):
        L = int(rng.integers(1, 5))
        K = int(rng.integers(1, 3))
        N = int(rng.integers(1, L + 1))
        s = Scenario(N, [range(1, N + 1)], ResourceGrid(K, L))
        c = generate_weights(s, cfg, i).values
        r = reduce(c, s.grid)
        square = np.zeros((L, L))
        square[:N] = r.d
        m = solve(square)
        ks = [recover_subchannel(r, v, m.pairs[v] + 1) for v in range(N)]
        value = sum(c[v, k - 1] for v, k in enumerate(ks))
        best = exhaustive_solve(s, c).best_value
        worst = max(worst, abs(value - best) / c.max())
    elapsed = time.perf_counter() - t
    passed = worst <= 1e-9 and elapsed < 30
    record_criterion(2, passed, f"200 single-cluster instances, max normalized error {worst:.2e}, {elapsed:.2f}s (< 30s)")
    assert passed


def test_3_conflict_freedom(record_criterion):
    rng = np.random.default_rng(1003)
    cfg = SinrModelConfig(master_seed=1003)
    checked, violations = 0, 0
    for i in range(1000):
        J = int(rng.integers(1, 5))
        sizes = rng.integers(1, 13, size=J)
        shared = int(rng.integers(0, sizes.min() + 1))
        L = int(rng.integers(sizes.max(), 17))
        K = int(rng.choice([1, 2, 7]))
        s = shared_intersection_scenario(sizes, shared, K, L)
        w = generate_weights(s, cfg, i)
        allocs = [run_bgm_sa(s, w)]
        grouping = pre_group(s, make_rng(1003, i, GROUPING_STREAM))
        allocs += [run_bgm_pa(s, w, m, grouping=grouping) for m in GroupMetric]
        for a in allocs:
            report = validate_allocation(a, s)
            violations += len(report.conflicts) + len(report.unassigned)
            checked += 1
    passed = violations == 0
    record_criterion(3, passed, f"{checked} allocations over 1000 scenarios, {violations} violations")
    assert passed


def test_4_near_optimality(record_criterion):
    rng = np.random.default_rng(1004)
    cfg = SinrModelConfig(master_seed=1004)
    sa_gaps, pa_gaps = [], []
    t = time.perf_counter()
    for i in range(100):
        J = int(rng.integers(2, 4))
        sizes = rng.integers(2, 5, size=J)
        shared = int(rng.integers(1, sizes.min() + 1))
        L = int(rng.integers(sizes.max(), 6))
        K = int(rng.integers(1, 3))
        s = shared_intersection_scenario(sizes, shared, K, L)
        w = generate_weights(s, cfg, i)
        best = exhaustive_solve(s, w).best_value
        sa_gaps.append(optimality_gap(sum_rate(run_bgm_sa(s, w), w), best))
        pa = run_bgm_pa(s, w, "min", seed=make_rng(1004, i, GROUPING_STREAM))
        pa_gaps.append(optimality_gap(sum_rate(pa, w), best))
    elapsed = time.perf_counter() - t
    mean_sa, max_sa, mean_pa = np.mean(sa_gaps), np.max(sa_gaps), np.mean(pa_gaps)
    passed = mean_sa <= 0.05 and max_sa <= 0.15 and mean_sa <= mean_pa and elapsed < 120
    record_criterion(
        4, passed,
        f"BGM-SA gap mean {mean_sa:.3%} (<= 5%) max {max_sa:.3%} (<= 15%); "
        f"BGM-PA-MIN mean {mean_pa:.3%}; {elapsed:.1f}s (< 120s)",
    )
    assert passed


def test_5_intersection_trends(record_criterion):
    fractions = [0.1, 0.3, 0.5, 0.7, 0.9]
    worst = {"bgm-sa": [], "bgm-pa-min": []}
    t = time.perf_counter()
    for frac in fractions:
        cfg = ExperimentConfig(algorithms=["bgm-sa", "bgm-pa"], metrics=["min"], runs=200, master_seed=1005,
                               cluster_sizes=[20] * 4, intersection=round(frac * 20), K=7, L=20)
        records = run_all(cfg)
        for alg in worst:
            worst[alg].append(np.mean([r.criteria.worst_rate for run in records for r in run if r.algorithm == alg]))
    elapsed = time.perf_counter() - t
    rho_sa = spearmanr(fractions, worst["bgm-sa"])[0]
    rho_pa = spearmanr(fractions, worst["bgm-pa-min"])[0]
    passed = rho_sa <= 0 and rho_pa >= 0 and elapsed < 300
    fmt = lambda xs: ", ".join(f"{x / 1e6:.2f}" for x in xs)
    record_criterion(
        5, passed,
        f"spearman BGM-SA {rho_sa:+.2f} (<= 0) [{fmt(worst['bgm-sa'])}] Mbit/s, "
        f"BGM-PA-MIN {rho_pa:+.2f} (>= 0) [{fmt(worst['bgm-pa-min'])}] Mbit/s; {elapsed:.1f}s",
    )
    assert passed


def test_6_metric_ordering(record_criterion):
    cfg = ExperimentConfig(algorithms=["bgm-pa"], metrics=[m.value for m in GroupMetric], runs=500,
                           master_seed=1006, cluster_sizes=(20, 18, 16), intersection=6, K=7, L=20)
    t = time.perf_counter()
    records = run_all(cfg)
    elapsed = time.perf_counter() - t

    def mean(alg, field):
        return np.mean([getattr(r.criteria, field) for run in records for r in run if r.algorithm == alg])

    w = {m: mean(f"bgm-pa-{m}", "worst_rate") for m in ("min", "max", "comb", "ivar")}
    avg_ave, avg_min = mean("bgm-pa-ave", "system_average_rate"), mean("bgm-pa-min", "system_average_rate")
    passed = w["min"] > w["max"] and w["comb"] > w["ivar"] and avg_ave >= avg_min and elapsed < 300
    record_criterion(
        6, passed,
        f"worst MIN {w['min'] / 1e6:.2f} > MAX {w['max'] / 1e6:.2f}, COMB {w['comb'] / 1e6:.2f} > IVAR "
        f"{w['ivar'] / 1e6:.2f}; average AVE {avg_ave / 1e6:.2f} >= MIN {avg_min / 1e6:.2f} Mbit/s; {elapsed:.1f}s",
    )
    assert passed


def test_7_full_scale_runtime(record_criterion):
    s = shared_intersection_scenario((100, 90, 80), 30, K=7, L=100)
    w = generate_weights(s, SinrModelConfig(master_seed=1007), 0)
    sa_times, pa_times = [], []
    for rep in range(3):
        t = time.perf_counter()
        sa = run_bgm_sa(s, w)
        sa_times.append(time.perf_counter() - t)
        t = time.perf_counter()
        run_bgm_pa(s, w, "min", seed=rep)
        pa_times.append(time.perf_counter() - t)
    clean = validate_allocation(sa, s).ok
    t_sa, t_pa = min(sa_times), min(pa_times)
    passed = max(sa_times) < 5 and clean and t_pa < t_sa
    record_criterion(
        7, passed,
        f"N=210 L=100 K=7: BGM-SA {max(sa_times) * 1e3:.1f} ms worst of 3 (< 5 s), clean={clean}; "
        f"BGM-PA {t_pa * 1e3:.1f} ms < BGM-SA {t_sa * 1e3:.1f} ms (best of 3)",
    )
    assert passed


def test_8_determinism(record_criterion, tmp_path):
    common = dict(algorithms=["bgm-sa", "bgm-pa", "exhaustive"], metrics=[m.value for m in GroupMetric],
                  runs=5, master_seed=1008, cluster_sizes=(4, 3, 3), intersection=1, K=2, L=4)
    for name in ("a", "b"):
        run_experiment(ExperimentConfig(**common, out=str(tmp_path / name)))
    same = all(
        (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in ("runs.csv", "summary.json")
    )
    record_criterion(8, same, "two runs with identical config and seed give byte-identical runs.csv and summary.json")
    assert same
