"""Quickstart: allocate subchannels to three overlapping clusters.

Run with ``python3 demos/quickstart.py``.
"""
# %%
import numpy as np

from bgmalloc import (
    SinrModelConfig,
    criteria,
    generate_weights,
    intersection_summary,
    run_bgm_pa,
    run_bgm_sa,
    shared_intersection_scenario,
    validate_allocation,
)

# %% [markdown]
# Three clusters of 10, 9 and 8 vehicles. Three vehicles sit in all three
# clusters; the grid has 2 subchannels in each of 10 subframes.

# %%
scenario = shared_intersection_scenario((10, 9, 8), n_shared=3, K=2, L=10)
print(intersection_summary(scenario))

# %%
weights = generate_weights(scenario, SinrModelConfig(master_seed=7), run_index=0)
print("rate matrix", weights.values.shape, "max %.2f Mbit/s" % (weights.values.max() / 1e6))

# %% [markdown]
# Sequential allocation settles clusters largest-first; parallel allocation
# groups private vehicles from different clusters and matches once.

# %%
for name, alloc in [("bgm-sa", run_bgm_sa(scenario, weights)),
                    ("bgm-pa-min", run_bgm_pa(scenario, weights, "min", seed=0))]:
    report = validate_allocation(alloc, scenario)
    c = criteria(alloc, weights)
    print(f"{name:11s} ok={report.ok}  average {c.system_average_rate / 1e6:6.2f}  "
          f"worst {c.worst_rate / 1e6:6.2f} Mbit/s")

# %%
alloc = run_bgm_sa(scenario, weights)
print("first five vehicles:", {v: alloc[v] for v in range(1, 6)})
print("total rate %.1f Mbit/s" % (sum(weights.values[v - 1, k - 1] for v, k in alloc.assignment.items()) / 1e6))
