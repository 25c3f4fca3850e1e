"""BGM-SA: successive per-cluster matching, largest cluster first.

Each cluster is solved as an L x L assignment between its still-unallocated
members (padded with zero-weight virtual vehicles) and the L subframes.
Subframes already used by an allocated cluster-mate are priced out with a
large negative weight, so later clusters never collide with earlier ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hungarian
from .channel import as_weight_array
from .grid import Allocation, ResourceGrid, Scenario, subchannel_to_slot, validate_allocation
from .reduction import ReducedWeights, recover_subchannel, reduce

PENALTY_FACTOR = 1e6


class InfeasibleError(RuntimeError):
    """The scenario cannot be allocated without a cluster conflict."""


@dataclass
class SaState:
    scenario: Scenario
    committed: dict[int, int] = field(default_factory=dict)
    # cluster id (1-based) -> subframes held by its allocated members
    occupied: dict[int, set[int]] = field(default_factory=dict)

    def __post_init__(self):
        for j in range(1, self.scenario.J + 1):
            self.occupied.setdefault(j, set())

    def allocation(self) -> Allocation:
        return Allocation(self.committed)

    def forbidden_subframes(self, vehicle: int) -> set[int]:
        out: set[int] = set()
        for j in self.scenario.clusters_of(vehicle):
            out |= self.occupied[j]
        return out

    def commit(self, vehicle: int, k: int) -> None:
        grid = self.scenario.grid
        self.committed[vehicle] = k
        l = subchannel_to_slot(k, grid)[0]
        for j in self.scenario.clusters_of(vehicle):
            self.occupied[j].add(l)


def order_clusters(scenario: Scenario) -> list[int]:
    """Cluster ids by descending size, ties by ascending id."""
    return sorted(range(1, scenario.J + 1), key=lambda j: (-len(scenario.clusters[j - 1]), j))


def allocate_cluster(j: int, state: SaState, reduced: ReducedWeights, grid: ResourceGrid) -> SaState:
    """Match the unallocated members of cluster ``j`` to free subframes.

    ``reduced`` holds one row per vehicle (row ``i - 1`` for vehicle ``i``).
    A member is barred from every subframe occupied in any of its clusters,
    not only in ``j``; otherwise a vehicle shared between two unprocessed
    clusters could land on a subframe taken in the other one.
    """
    scenario = state.scenario
    members = sorted(scenario.clusters[j - 1])
    pending = [v for v in members if v not in state.committed]
    if not pending:
        return state

    L = grid.L
    held = state.occupied[j]
    if len(pending) + len(held) > L:
        raise InfeasibleError(
            f"cluster {j}: {len(pending)} unallocated vehicles but only {L - len(held)} free subframes"
        )

    d = reduced.d
    ref = float(d.max()) if d.size and d.max() > 0 else 1.0
    penalty = -PENALTY_FACTOR * ref

    square = np.zeros((L, L))
    for row, v in enumerate(pending):
        square[row] = d[v - 1]
        barred = [l - 1 for l in state.forbidden_subframes(v)]
        square[row, barred] = penalty

    matching = hungarian.solve(square)
    for row, v in enumerate(pending):
        l = matching.pairs[row] + 1
        if l in state.forbidden_subframes(v):
            raise InfeasibleError(
                f"cluster {j}: vehicle {v} has no conflict-free subframe left"
            )
        taken = {
            k for u, k in state.committed.items()
            if subchannel_to_slot(k, grid)[0] == l and set(scenario.clusters_of(u)) & set(scenario.clusters_of(v))
        }
        state.commit(v, recover_subchannel(reduced, v - 1, l, taken))
    return state


def run_bgm_sa(scenario: Scenario, weights) -> Allocation:
    c = as_weight_array(weights)
    expected = (scenario.vehicle_count, scenario.grid.n_subchannels)
    if c.shape != expected:
        raise ValueError(f"weights have shape {c.shape}, scenario needs {expected}")
    reduced = reduce(c, scenario.grid)
    state = SaState(scenario)
    for j in order_clusters(scenario):
        allocate_cluster(j, state, reduced, scenario.grid)
    alloc = state.allocation()
    report = validate_allocation(alloc, scenario)
    if not report.ok:
        # unreachable unless the matcher misbehaves
        raise AssertionError(report.describe())
    return alloc
