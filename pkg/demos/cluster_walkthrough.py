"""Step through sequential allocation on a ten-vehicle, four-cluster topology.

Vehicles 1 and 2 belong to every cluster; the rest are private.  One
subchannel per subframe keeps the picture small.
"""
# %%
import numpy as np

from bgmalloc import ResourceGrid, Scenario, build_membership, reduce, validate_allocation
from bgmalloc.bgm_sa import SaState, allocate_cluster, order_clusters

clusters = [[1, 2, 3, 4, 5], [1, 2, 6, 7], [1, 2, 8, 9], [1, 2, 10]]
scenario = Scenario(10, clusters, ResourceGrid(K=1, L=5))
print(build_membership(scenario))

# %%
rng = np.random.default_rng(3)
c = rng.uniform(1, 10, size=(10, 5)).round(1)
reduced = reduce(c, scenario.grid)
print("processing order:", order_clusters(scenario))

# %% [markdown]
# After each cluster, shared vehicles keep their subframe and the remaining
# members of later clusters are kept off it.

# %%
state = SaState(scenario)
for j in order_clusters(scenario):
    allocate_cluster(j, state, reduced, scenario.grid)
    print(f"cluster {j}: committed {dict(sorted(state.committed.items()))}")

alloc = state.allocation()
print(validate_allocation(alloc, scenario).describe())
