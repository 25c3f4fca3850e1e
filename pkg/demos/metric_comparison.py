"""Compare the six group metrics of parallel allocation over many random runs."""
# %%
import numpy as np

from bgmalloc.bgm_pa import GroupMetric
from bgmalloc.experiment import ExperimentConfig, run_all

cfg = ExperimentConfig(algorithms=["bgm-sa", "bgm-pa"], metrics=[m.value for m in GroupMetric],
                       runs=100, master_seed=11, cluster_sizes=(20, 18, 16), intersection=6, K=7, L=20)
records = run_all(cfg)

# %%
print(f"{'algorithm':12s} {'average':>9s} {'worst':>9s} {'2nd worst':>10s} {'std':>8s}   Mbit/s")
for label in cfg.labels():
    rows = np.array([r.criteria.as_tuple() for run in records for r in run if r.algorithm == label])
    mean = rows.mean(axis=0) / 1e6
    print(f"{label:12s} {mean[1]:9.2f} {mean[2]:9.2f} {mean[3]:10.2f} {mean[4]:8.2f}")
