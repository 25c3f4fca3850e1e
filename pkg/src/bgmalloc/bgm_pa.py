"""BGM-PA: pre-group vehicles across clusters, then solve a single matching.

Vehicles that belong to more than one cluster stay alone. Every other
vehicle is packed with at most one private vehicle from each other
cluster, so group members never share a cluster and may share a subframe.
Each group is summarised per subframe by a scalar metric and the groups
are matched to subframes in one Kuhn-Munkres run.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import hungarian
from .bgm_sa import InfeasibleError
from .channel import GROUPING_STREAM, as_weight_array, make_rng
from .grid import Allocation, Scenario, validate_allocation
from .reduction import ReducedWeights, recover_subchannel, reduce

IVAR_CAP = 1e6


class GroupMetric(str, enum.Enum):
    MIN = "min"
    MAX = "max"
    AVE = "ave"
    IVAR = "ivar"
    MPM = "mpm"
    COMB = "comb"

    @classmethod
    def parse(cls, name: "str | GroupMetric") -> "GroupMetric":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"unknown metric {name!r}; choose from {[m.value for m in cls]}") from None


@dataclass(frozen=True)
class Grouping:
    groups: tuple[tuple[int, ...], ...]

    @property
    def group_of(self) -> dict[int, int]:
        return {v: u for u, g in enumerate(self.groups) for v in g}

    def __len__(self) -> int:
        return len(self.groups)


def shared_vehicles(scenario: Scenario) -> set[int]:
    """Vehicles that may not be grouped: members of two or more clusters.

    With the common-intersection topology these are exactly the vehicles in
    every cluster.
    """
    count: dict[int, int] = {}
    for c in scenario.clusters:
        for v in c:
            count[v] = count.get(v, 0) + 1
    return {v for v, n in count.items() if n > 1}


def pre_group(scenario: Scenario, rng: np.random.Generator | int) -> Grouping:
    """Randomly pack private vehicles into cross-cluster groups.

    Shared vehicles come first as singletons (ascending id). Then, round
    after round, clusters are visited in a fresh random order and each one
    that still has ungrouped private vehicles contributes one drawn
    uniformly at random, until every vehicle is grouped.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    shared = shared_vehicles(scenario)
    groups: list[tuple[int, ...]] = [(v,) for v in sorted(shared)]
    pools = [sorted(c - shared) for c in scenario.clusters]
    while any(pools):
        group = []
        for j in rng.permutation(len(pools)):
            pool = pools[j]
            if pool:
                group.append(pool.pop(int(rng.integers(len(pool)))))
        groups.append(tuple(group))
    if len(groups) > scenario.grid.L:
        raise InfeasibleError(f"{len(groups)} vehicle groups but only L={scenario.grid.L} subframes")
    return Grouping(tuple(groups))


def metric_values(values: np.ndarray, metric: GroupMetric | str, ivar_cap: float = IVAR_CAP) -> np.ndarray:
    """Reduce axis 0 (group members) of ``values`` with ``metric``.

    Variance is the population variance; IVAR is ``1 / VAR`` capped at
    ``ivar_cap`` (which also covers VAR == 0).
    """
    metric = GroupMetric.parse(metric)
    values = np.asarray(values, dtype=float)
    if values.shape[0] == 0:
        raise ValueError("empty vehicle group")
    lo, hi, mean = values.min(axis=0), values.max(axis=0), values.mean(axis=0)
    if metric is GroupMetric.MIN:
        return lo
    if metric is GroupMetric.MAX:
        return hi
    if metric is GroupMetric.AVE:
        return mean
    if metric is GroupMetric.MPM:
        return lo + hi
    var = values.var(axis=0)
    if metric is GroupMetric.COMB:
        return mean + lo - np.sqrt(var)
    with np.errstate(divide="ignore"):
        inv = np.where(var > 0, 1.0 / np.where(var > 0, var, 1.0), np.inf)
    return np.minimum(inv, ivar_cap)


def group_weights(grouping: Grouping, reduced: ReducedWeights | np.ndarray, metric: GroupMetric | str) -> np.ndarray:
    """|groups| x L matrix of metric-compressed reduced weights.

    ``reduced`` has one row per vehicle (row ``i - 1`` is vehicle ``i``).
    """
    d = reduced.d if isinstance(reduced, ReducedWeights) else np.asarray(reduced, dtype=float)
    out = np.empty((len(grouping), d.shape[1]))
    for u, members in enumerate(grouping.groups):
        if not members:
            raise ValueError(f"group {u} is empty")
        out[u] = metric_values(d[[v - 1 for v in members]], metric)
    return out


def run_bgm_pa(
    scenario: Scenario,
    weights,
    metric: GroupMetric | str = GroupMetric.MIN,
    seed: int | np.random.Generator = 0,
    grouping: Grouping | None = None,
) -> Allocation:
    """Allocate every vehicle with one matching over pre-grouped vehicles.

    ``seed`` drives the pre-grouping; pass ``grouping`` to reuse one across
    metrics. Weights are scaled to unit maximum before the metric is applied
    so the IVAR cap is in normalised units.
    """
    c = as_weight_array(weights)
    expected = (scenario.vehicle_count, scenario.grid.n_subchannels)
    if c.shape != expected:
        raise ValueError(f"weights have shape {c.shape}, scenario needs {expected}")
    if grouping is None:
        grouping = pre_group(scenario, seed)
    L = scenario.grid.L
    if len(grouping) > L:
        raise InfeasibleError(f"{len(grouping)} vehicle groups but only L={L} subframes")

    reduced = reduce(c, scenario.grid)
    scale = float(reduced.d.max()) if reduced.d.size and reduced.d.max() > 0 else 1.0
    square = np.zeros((L, L))
    square[: len(grouping)] = group_weights(grouping, reduced.d / scale, metric)
    matching = hungarian.solve(square)

    assignment = {}
    for u, members in enumerate(grouping.groups):
        l = matching.pairs[u] + 1
        for v in members:
            assignment[v] = recover_subchannel(reduced, v - 1, l)
    alloc = Allocation(assignment)
    report = validate_allocation(alloc, scenario)
    if not report.ok:
        raise AssertionError(report.describe())
    return alloc


def grouping_seed_rng(master_seed: int, run_index: int) -> np.random.Generator:
    return make_rng(master_seed, run_index, GROUPING_STREAM)
