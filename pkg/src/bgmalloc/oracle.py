"""Exhaustive branch-and-bound solver for the global allocation problem.

Only for small instances: used as ground truth when checking the heuristics.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import as_weight_array
from .grid import Allocation, Scenario

DEFAULT_LIMIT = 10**8


class SearchSpaceExceeded(RuntimeError):
    def __init__(self, estimate: int, limit: int):
        super().__init__(f"search space estimate {estimate:.3g} exceeds limit {limit:.3g}")
        self.estimate = estimate
        self.limit = limit


@dataclass(frozen=True)
class OracleResult:
    best_allocation: Allocation
    best_value: float
    explored: int  # complete feasible assignments reached


def search_space_estimate(scenario: Scenario) -> int:
    """Upper bound on the number of tree nodes the search can visit.

    Vehicle ``i`` (in id order) has at most ``K * (L - m_i)`` feasible
    choices, where ``m_i`` is the largest number of earlier vehicles that
    share one cluster with it; earlier members of one cluster always hold
    distinct subframes.
    """
    K, L = scenario.grid.K, scenario.grid.L
    before = [0] * scenario.J
    total, prefix = 1, 1
    for v in scenario.vehicles:
        mine = scenario.clusters_of(v)
        m = max(before[j - 1] for j in mine)
        prefix *= K * max(L - m, 0)
        total += prefix
        for j in mine:
            before[j - 1] += 1
    return total


def exhaustive_solve(scenario: Scenario, weights, limit: int = DEFAULT_LIMIT) -> OracleResult:
    """Maximum-sum conflict-free allocation by depth-first search.

    Vehicles are assigned in id order; subchannels are tried best-first.
    A branch is cut when it would reuse a subframe held in one of the
    vehicle's clusters, or when its value plus every remaining vehicle's
    unconstrained best cannot beat the incumbent.
    """
    c = as_weight_array(weights)
    N, K = scenario.vehicle_count, scenario.grid.K
    if c.shape != (N, scenario.grid.n_subchannels):
        raise ValueError(f"weights have shape {c.shape}, scenario needs {(N, scenario.grid.n_subchannels)}")
    estimate = search_space_estimate(scenario)
    if estimate > limit:
        raise SearchSpaceExceeded(estimate, limit)

    rows = [c[i].tolist() for i in range(N)]
    order = [sorted(range(c.shape[1]), key=lambda k, r=rows[i]: (-r[k], k)) for i in range(N)]
    memberships = [[j - 1 for j in scenario.clusters_of(v)] for v in scenario.vehicles]
    row_best = c.max(axis=1)
    # optimistic value of vehicles i.. onward
    tail = np.concatenate([np.cumsum(row_best[::-1])[::-1], [0.0]]).tolist()

    busy = [0] * scenario.J  # subframe bitsets per cluster
    choice = [0] * N
    best_value = -np.inf
    best_choice: list[int] | None = None
    explored = 0

    def dfs(i: int, value: float) -> None:
        nonlocal best_value, best_choice, explored
        if i == N:
            explored += 1
            if value > best_value:
                best_value = value
                best_choice = choice.copy()
            return
        mine = memberships[i]
        blocked = 0
        for j in mine:
            blocked |= busy[j]
        r = rows[i]
        for k in order[i]:
            if value + r[k] + tail[i + 1] <= best_value:
                # candidates are sorted, nothing further can help
                break
            bit = 1 << (k // K)
            if blocked & bit:
                continue
            for j in mine:
                busy[j] |= bit
            choice[i] = k
            dfs(i + 1, value + r[k])
            for j in mine:
                busy[j] &= ~bit

    dfs(0, 0.0)
    if best_choice is None:
        # only possible when no feasible assignment exists at all
        raise RuntimeError("no feasible allocation")
    alloc = Allocation({v: best_choice[v - 1] + 1 for v in scenario.vehicles})
    return OracleResult(alloc, float(sum(c[v - 1, best_choice[v - 1]] for v in scenario.vehicles)), explored)
