"""Channelization, cluster scenarios and allocation validation.

Vehicle ids and subchannel indices are 1-based, as in the usual sidelink
notation: subchannel ``k`` lives in subframe ``ceil(k / K)`` at frequency
slot ``(k - 1) % K + 1``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class ScenarioError(ValueError):
    """Raised for malformed or infeasible scenarios."""


class AllocationError(ValueError):
    """Raised when an allocation references unknown vehicles or subchannels."""


@dataclass(frozen=True)
class ResourceGrid:
    """K subchannels per subframe, L subframes."""

    K: int
    L: int
    subchannel_bandwidth: float = 1.26e6
    subframe_duration: float = 1e-3

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ScenarioError(f"K must be a positive integer, got {self.K!r}")
        if int(self.L) != self.L or self.L < 1:
            raise ScenarioError(f"L must be a positive integer, got {self.L!r}")
        if not self.subchannel_bandwidth > 0:
            raise ScenarioError("subchannel bandwidth must be positive")
        if not self.subframe_duration > 0:
            raise ScenarioError("subframe duration must be positive")

    @property
    def n_subchannels(self) -> int:
        return self.K * self.L

    def subframe_columns(self, subframe: int) -> range:
        """0-based column indices of the K subchannels of a 1-based subframe."""
        start = (subframe - 1) * self.K
        return range(start, start + self.K)


def subchannel_to_slot(k: int, grid: ResourceGrid) -> tuple[int, int]:
    """Map subchannel index k to ``(subframe, frequency_slot)``, both 1-based."""
    if not 1 <= k <= grid.n_subchannels:
        raise IndexError(f"subchannel {k} outside 1..{grid.n_subchannels}")
    return (k - 1) // grid.K + 1, (k - 1) % grid.K + 1


def slot_to_subchannel(subframe: int, slot: int, grid: ResourceGrid) -> int:
    """Inverse of :func:`subchannel_to_slot`."""
    if not 1 <= subframe <= grid.L:
        raise IndexError(f"subframe {subframe} outside 1..{grid.L}")
    if not 1 <= slot <= grid.K:
        raise IndexError(f"frequency slot {slot} outside 1..{grid.K}")
    return (subframe - 1) * grid.K + slot


@dataclass(frozen=True)
class Scenario:
    """Vehicles 1..N grouped into (possibly overlapping) broadcast clusters.

    Every vehicle must belong to at least one cluster and every cluster must
    fit in the grid, i.e. hold at most L vehicles.
    """

    vehicle_count: int
    clusters: tuple[frozenset[int], ...]
    grid: ResourceGrid

    def __init__(self, vehicle_count: int, clusters: Iterable[Iterable[int]], grid: ResourceGrid):
        object.__setattr__(self, "vehicle_count", int(vehicle_count))
        object.__setattr__(self, "clusters", tuple(frozenset(int(v) for v in c) for c in clusters))
        object.__setattr__(self, "grid", grid)
        self._validate()

    def _validate(self):
        N = self.vehicle_count
        if N < 1:
            raise ScenarioError("scenario needs at least one vehicle")
        if not self.clusters:
            raise ScenarioError("scenario needs at least one cluster")
        seen: set[int] = set()
        for j, members in enumerate(self.clusters, start=1):
            if not members:
                raise ScenarioError(f"cluster {j} is empty")
            bad = sorted(v for v in members if not 1 <= v <= N)
            if bad:
                raise ScenarioError(f"cluster {j} references unknown vehicles {bad}")
            if len(members) > self.grid.L:
                raise ScenarioError(
                    f"cluster {j} has {len(members)} vehicles but only L={self.grid.L} subframes"
                )
            seen |= members
        orphans = sorted(set(range(1, N + 1)) - seen)
        if orphans:
            raise ScenarioError(f"vehicles {orphans} belong to no cluster")

    @property
    def J(self) -> int:
        return len(self.clusters)

    @property
    def cluster_sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.clusters)

    @property
    def vehicles(self) -> range:
        return range(1, self.vehicle_count + 1)

    def clusters_of(self, vehicle: int) -> list[int]:
        """1-based ids of the clusters containing ``vehicle``."""
        return [j for j, c in enumerate(self.clusters, start=1) if vehicle in c]

    @classmethod
    def from_dict(cls, data: Mapping) -> "Scenario":
        try:
            grid = ResourceGrid(
                K=int(data["K"]),
                L=int(data["L"]),
                subchannel_bandwidth=float(data.get("bandwidth_hz", 1.26e6)),
                subframe_duration=float(data.get("subframe_ms", 1.0)) * 1e-3,
            )
            clusters = [[int(v) for v in c] for c in data["clusters"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"malformed scenario document: {exc}") from exc
        if any(v < 1 for c in clusters for v in c):
            raise ScenarioError("vehicle ids must be positive integers")
        N = max((v for c in clusters for v in c), default=0)
        return cls(N, clusters, grid)

    def to_dict(self) -> dict:
        return {
            "K": self.grid.K,
            "L": self.grid.L,
            "bandwidth_hz": self.grid.subchannel_bandwidth,
            "subframe_ms": self.grid.subframe_duration * 1e3,
            "clusters": [sorted(c) for c in self.clusters],
        }


def load_scenario(path: str | os.PathLike) -> Scenario:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    return Scenario.from_dict(data)


def save_scenario(scenario: Scenario, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(scenario.to_dict(), fh, indent=2)
        fh.write("\n")


def shared_intersection_scenario(
    cluster_sizes: Sequence[int], n_shared: int, K: int, L: int, **grid_kwargs
) -> Scenario:
    """Build J clusters that all share the same ``n_shared`` vehicles.

    Shared vehicles get ids ``1..n_shared``; the private members of each
    cluster follow in cluster order, so ``N = sum(N_j) - (J - 1) * n_shared``.
    """
    sizes = [int(n) for n in cluster_sizes]
    if not sizes:
        raise ScenarioError("need at least one cluster size")
    if n_shared < 0 or n_shared > min(sizes):
        raise ScenarioError(f"intersection size {n_shared} must lie in 0..{min(sizes)}")
    shared = list(range(1, n_shared + 1))
    clusters = []
    nxt = n_shared + 1
    for n in sizes:
        own = list(range(nxt, nxt + n - n_shared))
        nxt += n - n_shared
        clusters.append(shared + own)
    return Scenario(nxt - 1, clusters, ResourceGrid(K, L, **grid_kwargs))


def build_membership(scenario: Scenario) -> np.ndarray:
    """J x N binary matrix with ``Q[j-1, i-1] == 1`` iff vehicle i is in cluster j."""
    Q = np.zeros((scenario.J, scenario.vehicle_count), dtype=np.int8)
    for j, members in enumerate(scenario.clusters):
        Q[j, [v - 1 for v in members]] = 1
    return Q


@dataclass(frozen=True)
class IntersectionSummary:
    intersection_vehicles: frozenset[int]

    @property
    def N_hat(self) -> int:
        return len(self.intersection_vehicles)


def intersection_summary(scenario: Scenario) -> IntersectionSummary:
    common = frozenset.intersection(*scenario.clusters)
    return IntersectionSummary(common)


@dataclass(frozen=True)
class Allocation:
    """Vehicle id -> 1-based subchannel index."""

    assignment: Mapping[int, int]

    def __init__(self, assignment: Mapping[int, int]):
        object.__setattr__(self, "assignment", dict(sorted((int(v), int(k)) for v, k in assignment.items())))

    def __getitem__(self, vehicle: int) -> int:
        return self.assignment[vehicle]

    def __len__(self) -> int:
        return len(self.assignment)

    def subframe_of(self, vehicle: int, grid: ResourceGrid) -> int:
        return subchannel_to_slot(self.assignment[vehicle], grid)[0]

    def incidence_vector(self, scenario: Scenario) -> np.ndarray:
        """0/1 solution vector x of length N*K*L, vehicle-major."""
        KL = scenario.grid.n_subchannels
        x = np.zeros(scenario.vehicle_count * KL, dtype=np.int8)
        for v, k in self.assignment.items():
            x[(v - 1) * KL + (k - 1)] = 1
        return x

    def to_dict(self) -> dict:
        return {"assignment": {str(v): k for v, k in self.assignment.items()}}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Allocation":
        try:
            return cls({int(v): int(k) for v, k in data["assignment"].items()})
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise AllocationError(f"malformed allocation document: {exc}") from exc


@dataclass
class ValidationReport:
    """Empty report means the allocation is feasible."""

    # vehicles assigned a number of subchannels other than one
    unassigned: list[int] = field(default_factory=list)
    # (cluster, subframe, sorted vehicle ids) with two or more vehicles
    conflicts: list[tuple[int, int, tuple[int, ...]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.unassigned and not self.conflicts

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "allocation is conflict-free"
        lines = []
        if self.unassigned:
            lines.append(f"vehicles without exactly one subchannel: {self.unassigned}")
        for j, l, vs in self.conflicts:
            lines.append(f"cluster {j}, subframe {l}: vehicles {list(vs)} collide")
        return "\n".join(lines)


def validate_allocation(
    alloc: Allocation, scenario: Scenario, vehicles: Iterable[int] | None = None
) -> ValidationReport:
    """Check one-subchannel-per-vehicle and cluster/subframe exclusivity.

    ``vehicles`` restricts the one-per-vehicle check to a subset, which is
    how partial allocations are checked mid-run.
    """
    grid = scenario.grid
    for v, k in alloc.assignment.items():
        if not 1 <= v <= scenario.vehicle_count:
            raise AllocationError(f"allocation references unknown vehicle {v}")
        if not 1 <= k <= grid.n_subchannels:
            raise AllocationError(f"vehicle {v} mapped to unknown subchannel {k}")

    report = ValidationReport()
    required = scenario.vehicles if vehicles is None else sorted(vehicles)
    report.unassigned = [v for v in required if v not in alloc.assignment]

    for j, members in enumerate(scenario.clusters, start=1):
        by_subframe: dict[int, list[int]] = {}
        for v in members:
            if v in alloc.assignment:
                by_subframe.setdefault(alloc.subframe_of(v, grid), []).append(v)
        for l in sorted(by_subframe):
            if len(by_subframe[l]) > 1:
                report.conflicts.append((j, l, tuple(sorted(by_subframe[l]))))
    return report


def constraint_matrix(scenario: Scenario) -> np.ndarray:
    """Stacked one-per-vehicle and cluster/subframe rows acting on x.

    Rows ``0..N-1`` are ``(I_N kron 1_L) kron 1_K``; the remaining J*L rows
    are ``(Q kron I_L) kron 1_K``.
    """
    N, K, L = scenario.vehicle_count, scenario.grid.K, scenario.grid.L
    Q = build_membership(scenario)
    top = np.kron(np.eye(N, dtype=np.int8), np.ones((1, L), dtype=np.int8))
    bottom = np.kron(Q, np.eye(L, dtype=np.int8))
    return np.kron(np.vstack([top, bottom]), np.ones((1, K), dtype=np.int8))
