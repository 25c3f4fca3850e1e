"""Per-run rate statistics, Monte-Carlo aggregation and empirical CDFs."""
from __future__ import annotations

from dataclasses import astuple, dataclass, fields
from typing import Sequence

import numpy as np

from .channel import as_weight_array
from .grid import Allocation


@dataclass(frozen=True)
class RunCriteria:
    """Rates in bits/s achieved on each vehicle's single subchannel."""

    highest_rate: float
    system_average_rate: float
    worst_rate: float
    second_worst_rate: float
    rate_stddev: float

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)


@dataclass(frozen=True)
class CdfSeries:
    rates: np.ndarray
    probabilities: np.ndarray

    def __call__(self, x: float) -> float:
        """Right-continuous empirical CDF evaluated at ``x``."""
        return float(np.searchsorted(self.rates, x, side="right")) / len(self.rates)


def vehicle_rates(alloc: Allocation, weights) -> np.ndarray:
    c = as_weight_array(weights)
    return np.array([c[v - 1, k - 1] for v, k in alloc.assignment.items()], dtype=float)


def rate_criteria(rates) -> RunCriteria:
    r = np.sort(np.asarray(rates, dtype=float))
    if r.size == 0:
        raise ValueError("no rates")
    second = r[1] if r.size > 1 else r[0]
    return RunCriteria(
        highest_rate=float(r[-1]),
        system_average_rate=float(r.mean()),
        worst_rate=float(r[0]),
        second_worst_rate=float(second),
        rate_stddev=float(r.std()),
    )


def criteria(alloc: Allocation, weights) -> RunCriteria:
    return rate_criteria(vehicle_rates(alloc, weights))


def empirical_cdf(samples) -> CdfSeries:
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("no samples")
    p = np.arange(1, x.size + 1) / x.size
    return CdfSeries(x, p)


def aggregate(runs: Sequence[RunCriteria], rate_samples: Sequence[np.ndarray] = ()) -> tuple[RunCriteria, CdfSeries | None]:
    """Field-wise mean of ``runs`` and the pooled CDF of ``rate_samples``."""
    if not runs:
        raise ValueError("cannot aggregate zero runs")
    mean = np.mean([r.as_tuple() for r in runs], axis=0)
    cdf = empirical_cdf(np.concatenate([np.ravel(s) for s in rate_samples])) if len(rate_samples) else None
    return RunCriteria(*(float(x) for x in mean)), cdf
